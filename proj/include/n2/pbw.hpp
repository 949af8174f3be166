#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "n2/algebra.hpp"

namespace n2 {

// Normal-ordered PBW monomial: factors strictly increasing in the global
// PBW order, odd generators with exponent 1. The empty monomial is the unit.
struct PbwMonomial {
    std::vector<std::pair<GeneratorMode, uint32_t>> factors;

    bool is_unit() const { return factors.empty(); }
    long total_degree() const {
        long d = 0;
        for (auto& [g, e] : factors) d += e;
        return d;
    }
    int parity(const AlgebraSpec& s) const {
        int p = 0;
        for (auto& [g, e] : factors)
            if (s.odd(g)) p ^= (e & 1);
        return p;
    }
    QQ level_drop(const AlgebraSpec& s) const {
        QQ d = 0;
        for (auto& [g, e] : factors) d += s.level_drop(g) * e;
        return d;
    }
    QQ charge(const AlgebraSpec& s) const {
        QQ c = 0;
        for (auto& [g, e] : factors) c += s.charge(g) * e;
        return c;
    }
    std::string str(const AlgebraSpec& s) const;

    friend auto operator<=>(const PbwMonomial& a, const PbwMonomial& b) {
        return a.factors <=> b.factors;
    }
    friend bool operator==(const PbwMonomial&, const PbwMonomial&) = default;
};

// Sparse exact-rational element of the universal enveloping superalgebra.
struct EnvElement {
    std::map<PbwMonomial, QQ> terms;

    bool zero() const { return terms.empty(); }
    void add(const PbwMonomial& m, const QQ& c) {
        if (c == 0) return;
        auto [it, fresh] = terms.emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) terms.erase(it);
        }
    }
    EnvElement& operator+=(const EnvElement& o) {
        for (auto& [m, c] : o.terms) add(m, c);
        return *this;
    }
    EnvElement& operator*=(const QQ& s) {
        if (s == 0) {
            terms.clear();
            return *this;
        }
        for (auto& [m, c] : terms) c *= s;
        return *this;
    }
    static EnvElement unit(const QQ& c = QQ(1)) {
        EnvElement e;
        if (c != 0) e.terms[PbwMonomial{}] = c;
        return e;
    }
    static EnvElement generator(GeneratorMode g, const QQ& c = QQ(1)) {
        EnvElement e;
        PbwMonomial m;
        m.factors.push_back({g, 1});
        if (c != 0) e.terms[m] = c;
        return e;
    }
    std::string str(const AlgebraSpec& s) const;
};

// A word in generator modes with a coefficient; the raw input of
// normal ordering.
struct RawWord {
    QQ coeff;
    std::vector<GeneratorMode> letters;
};
using RawExpr = std::vector<RawWord>;

// Default hard cap on monomial degree during rewriting.
inline constexpr long kDefaultDegreeCap = 64;

// PBW normal form by adjacent-transposition rewriting with bracket
// correction. Exact; terminates on (inversions, degree) lexicographic.
EnvElement normal_order(const AlgebraSpec& spec, const RawExpr& e,
                        long degree_cap = kDefaultDegreeCap);

// Normal-ordered product of two elements over the same algebra.
EnvElement multiply(const AlgebraSpec& spec, const EnvElement& a, const EnvElement& b,
                    long degree_cap = kDefaultDegreeCap);

// x . e with x a single generator mode (left multiplication).
EnvElement mode_times(const AlgebraSpec& spec, GeneratorMode x, const EnvElement& e,
                      long degree_cap = kDefaultDegreeCap);

// Convenience: parse words like "L(-2) L(-2)" against spec families.
EnvElement parse_words(const AlgebraSpec& spec, const std::string& text);

}  // namespace n2
