#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "n2/rational.hpp"

namespace n2 {

// Small sparse polynomial over Q in at most 4 variables. Enough for the
// gl(1|1) normal forms, the Zhu-algebra polynomials and the bimodule model.
struct Poly {
    using Exp = std::array<int, 4>;
    std::map<Exp, QQ> t;

    static Poly constant(const QQ& c) {
        Poly p;
        if (c != 0) p.t[{0, 0, 0, 0}] = c;
        return p;
    }
    static Poly var(int i, const QQ& c = QQ(1)) {
        Poly p;
        Exp e{0, 0, 0, 0};
        e[i] = 1;
        if (c != 0) p.t[e] = c;
        return p;
    }
    bool zero() const { return t.empty(); }
    void add(const Exp& e, const QQ& c) {
        if (c == 0) return;
        auto [it, fresh] = t.emplace(e, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) t.erase(it);
        }
    }
    Poly operator+(const Poly& o) const {
        Poly r = *this;
        for (auto& [e, c] : o.t) r.add(e, c);
        return r;
    }
    Poly operator-(const Poly& o) const {
        Poly r = *this;
        for (auto& [e, c] : o.t) r.add(e, -c);
        return r;
    }
    Poly operator*(const Poly& o) const {
        Poly r;
        for (auto& [e1, c1] : t)
            for (auto& [e2, c2] : o.t) {
                Exp e{e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]};
                r.add(e, c1 * c2);
            }
        return r;
    }
    Poly operator*(const QQ& s) const {
        Poly r;
        if (s == 0) return r;
        r = *this;
        for (auto& [e, c] : r.t) c *= s;
        return r;
    }
    friend Poly operator-(const Poly& p) { return p * QQ(-1); }
    bool operator==(const Poly& o) const { return t == o.t; }

    QQ eval(const std::array<QQ, 4>& x) const {
        QQ acc(0);
        for (auto& [e, c] : t) {
            QQ term = c;
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < e[i]; ++k) term *= x[i];
            acc += term;
        }
        return acc;
    }

    // Substitute polynomials for each variable (full simultaneous subst).
    Poly subst(const std::array<Poly, 4>& x) const {
        Poly acc;
        for (auto& [e, c] : t) {
            Poly term = Poly::constant(c);
            for (int i = 0; i < 4; ++i)
                for (int k = 0; k < e[i]; ++k) term = term * x[i];
            acc = acc + term;
        }
        return acc;
    }

    int degree_in(int i) const {
        int d = 0;
        for (auto& [e, c] : t) d = std::max(d, e[i]);
        return d;
    }
    bool uses_only(int i) const {
        for (auto& [e, c] : t)
            for (int k = 0; k < 4; ++k)
                if (k != i && e[k] != 0) return false;
        return true;
    }

    // Projective comparison: equal after normalizing leading coefficients.
    bool proportional_to(const Poly& o) const {
        if (zero() || o.zero()) return zero() == o.zero();
        if (t.size() != o.t.size()) return false;
        const QQ s = o.t.begin()->second / t.begin()->second;
        auto it = t.begin();
        auto jt = o.t.begin();
        for (; it != t.end(); ++it, ++jt)
            if (it->first != jt->first || it->second * s != jt->second) return false;
        return true;
    }

    std::string str(const std::array<std::string, 4>& names) const;
};

// Dense univariate view (for the fusion quotients). Throws if other
// variables occur.
std::vector<QQ> to_dense_univariate(const Poly& p, int var);

// Monic gcd of univariate dense polynomials (empty = 0).
std::vector<QQ> poly_gcd(std::vector<QQ> a, std::vector<QQ> b);

// Rational roots with multiplicity; remainder = the non-rational cofactor
// degree (0 when the polynomial splits over Q).
struct RootReport {
    std::vector<std::pair<QQ, int>> roots;
    int unfactored_degree = 0;
};
RootReport rational_roots(const std::vector<QQ>& dense);

}  // namespace n2
