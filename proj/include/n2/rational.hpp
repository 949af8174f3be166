#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace n2 {

// Exact rational scalar. All core arithmetic runs on these; no floating
// point anywhere in the engine.
using QQ = mpq_class;

inline QQ qq(long num, long den = 1) {
    QQ r(num, den);
    r.canonicalize();
    return r;
}

// Parses "num", "num/den" or a plain integer string. Throws on malformed
// input or a zero denominator.
inline QQ parse_qq(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    std::string t = s;
    // mpq_class accepts "a/b" directly but silently misparses stray text.
    for (char ch : t) {
        if (!(ch == '-' || ch == '+' || ch == '/' || (ch >= '0' && ch <= '9')))
            throw std::invalid_argument("bad rational literal: " + s);
    }
    QQ r;
    if (r.set_str(t, 10) != 0) throw std::invalid_argument("bad rational literal: " + s);
    if (r.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
    r.canonicalize();
    return r;
}

inline std::string qq_str(const QQ& r) { return r.get_str(); }

inline bool is_integer(const QQ& r) { return r.get_den() == 1; }

inline long qq_floor_long(const QQ& r) {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
    if (!q.fits_slong_p()) throw std::overflow_error("rational out of long range");
    return q.get_si();
}

inline long qq_to_long(const QQ& r) {
    if (!is_integer(r)) throw std::invalid_argument("expected integer, got " + qq_str(r));
    if (!r.get_num().fits_slong_p()) throw std::overflow_error("integer out of long range");
    return r.get_num().get_si();
}

// binom(t, k) for rational t and k >= 0: t(t-1)...(t-k+1)/k!.
inline QQ qq_binom(const QQ& top, long k) {
    if (k < 0) return QQ(0);
    QQ acc(1);
    QQ t = top;
    for (long i = 0; i < k; ++i) {
        acc *= t - i;
        acc /= (i + 1);
    }
    return acc;
}

}  // namespace n2
