#include "n2/poly.hpp"

#include <sstream>
#include <stdexcept>

namespace n2 {

std::string Poly::str(const std::array<std::string, 4>& names) const {
    if (t.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [e, c] : t) {
        if (!first) os << " + ";
        first = false;
        os << qq_str(c);
        for (int i = 0; i < 4; ++i) {
            if (e[i] == 0) continue;
            os << "*" << names[i];
            if (e[i] > 1) os << "^" << e[i];
        }
    }
    return os.str();
}

std::vector<QQ> to_dense_univariate(const Poly& p, int var) {
    if (!p.uses_only(var)) throw std::invalid_argument("polynomial is not univariate");
    std::vector<QQ> d(p.degree_in(var) + 1, QQ(0));
    for (auto& [e, c] : p.t) d[e[var]] = c;
    while (!d.empty() && d.back() == 0) d.pop_back();
    return d;
}

namespace {

std::vector<QQ> poly_mod(std::vector<QQ> a, const std::vector<QQ>& b) {
    while (a.size() >= b.size() && !a.empty()) {
        const QQ f = a.back() / b.back();
        const std::size_t off = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i) a[off + i] -= f * b[i];
        while (!a.empty() && a.back() == 0) a.pop_back();
    }
    return a;
}

}  // namespace

std::vector<QQ> poly_gcd(std::vector<QQ> a, std::vector<QQ> b) {
    while (!a.empty() && a.back() == 0) a.pop_back();
    while (!b.empty() && b.back() == 0) b.pop_back();
    while (!b.empty()) {
        a = poly_mod(std::move(a), b);
        std::swap(a, b);
    }
    if (!a.empty()) {
        const QQ lead = a.back();
        for (auto& c : a) c /= lead;
    }
    return a;
}

RootReport rational_roots(const std::vector<QQ>& dense) {
    RootReport rep;
    std::vector<QQ> p = dense;
    while (!p.empty() && p.back() == 0) p.pop_back();
    if (p.empty()) return rep;  // zero polynomial: caller handles

    // Clear denominators, then try divisors of the ends.
    auto eval = [](const std::vector<QQ>& q, const QQ& x) {
        QQ acc(0);
        for (auto it = q.rbegin(); it != q.rend(); ++it) acc = acc * x + *it;
        return acc;
    };
    auto deflate = [](std::vector<QQ>& q, const QQ& r) {
        // synthetic division by (x - r); remainder is zero for a root
        const std::size_t n = q.size() - 1;
        std::vector<QQ> out(n, QQ(0));
        out[n - 1] = q[n];
        for (std::size_t i = n - 1; i >= 1; --i) out[i - 1] = q[i] + r * out[i];
        q = out;
    };

    while (p.size() > 1) {
        // strip root at zero
        if (p[0] == 0) {
            rep.roots.push_back({QQ(0), 1});
            p.erase(p.begin());
            continue;
        }
        mpz_class den(1);
        for (auto& c : p) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den().get_mpz_t());
        std::vector<mpz_class> ip;
        for (auto& c : p) ip.push_back(QQ(c * QQ(den)).get_num());

        bool found = false;
        // candidates r = s * u/v with u | ip[0], v | ip.back()
        std::vector<mpz_class> us, vs;
        mpz_class a0 = abs(ip.front()), an = abs(ip.back());
        for (mpz_class u = 1; u * u <= a0; ++u)
            if (a0 % u == 0) {
                us.push_back(u);
                us.push_back(a0 / u);
            }
        for (mpz_class v = 1; v * v <= an; ++v)
            if (an % v == 0) {
                vs.push_back(v);
                vs.push_back(an / v);
            }
        for (auto& u : us) {
            for (auto& v : vs) {
                for (int s : {1, -1}) {
                    QQ r(s * u, v);
                    r.canonicalize();
                    if (eval(p, r) == 0) {
                        rep.roots.push_back({r, 1});
                        deflate(p, r);
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
            if (found) break;
        }
        if (!found) break;
    }
    rep.unfactored_degree = static_cast<int>(p.empty() ? 0 : p.size() - 1);

    // merge multiplicities
    std::vector<std::pair<QQ, int>> merged;
    for (auto& [r, m] : rep.roots) {
        bool hit = false;
        for (auto& [r2, m2] : merged)
            if (r2 == r) {
                m2 += m;
                hit = true;
                break;
            }
        if (!hit) merged.push_back({r, m});
    }
    rep.roots = merged;
    return rep;
}

}  // namespace n2
