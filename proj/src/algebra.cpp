#include "n2/algebra.hpp"

#include <numeric>
#include <stdexcept>

namespace n2 {

Parameters Parameters::make(long p, long pp) {
    if (p < 2) throw std::invalid_argument("p must be >= 2");
    if (pp < 1) throw std::invalid_argument("p' must be >= 1");
    if (std::gcd(p, pp) != 1) throw std::invalid_argument("(p, p') must be coprime");
    return Parameters{p, pp};
}

QQ weight_jmn(const Parameters& par, long m, long n) {
    // (m-1)/2 - n/(2a), a = p'/p
    return qq(m - 1, 2) - qq(n) * qq(par.p, 2 * par.pp);
}

QQ sugawara_delta(const Parameters& par, const QQ& j) {
    return j * (j + 1) / (par.k() + 2);
}

bool in_ikw(const Parameters& par, long m, long n) {
    return 1 <= m && m <= par.p - 1 && 0 <= n && n <= par.pp - 1;
}

bool in_ibpz(const Parameters& par, long m, long n) {
    return in_ikw(par, m, n) && n != 0 && par.pp * m + par.p * n <= par.p * par.pp;
}

int AlgebraSpec::family_index(const std::string& fname) const {
    for (std::size_t i = 0; i < families.size(); ++i)
        if (families[i].name == fname) return static_cast<int>(i);
    throw std::invalid_argument("unknown generator family '" + fname + "' in " + name);
}

GeneratorMode AlgebraSpec::gen(const std::string& fname, const QQ& mode) const {
    const int fi = family_index(fname);
    QQ dm = mode * 2;
    if (!is_integer(dm))
        throw std::invalid_argument("mode denominator too large for " + fname);
    GeneratorMode g{static_cast<uint8_t>(fi), static_cast<int>(qq_to_long(dm))};
    validate_mode(g);
    return g;
}

void AlgebraSpec::validate_mode(const GeneratorMode& g) const {
    if (g.fam >= families.size()) throw std::invalid_argument("bad family index");
    const FamilyInfo& f = families[g.fam];
    if (f.zero_only) {
        if (g.dmode != 0)
            throw std::invalid_argument(f.name + " only exists at mode 0 in " + name);
        return;
    }
    if (f.half_modes != (g.dmode % 2 != 0))
        throw std::invalid_argument("mode " + qq_str(qq(g.dmode, 2)) +
                                    " not on the lattice of " + f.name);
}

namespace {

AlgebraPtr make_ns2(const Parameters& par) {
    auto s = std::make_shared<AlgebraSpec>();
    s->id = AlgebraId::Ns2;
    s->name = "ns2";
    s->params = par;
    s->central_name = "C";
    s->central_value = par.c();
    s->families = {
        {"L", false, false, false, qq(0), 0},
        {"J", false, false, false, qq(0), 1},
        {"G+", true, true, false, qq(1), 2},
        {"G-", true, true, false, qq(-1), 3},
    };
    return s;
}

AlgebraPtr make_affine(const Parameters& par) {
    auto s = std::make_shared<AlgebraSpec>();
    s->id = AlgebraId::AffineSl2;
    s->name = "affine-sl2";
    s->params = par;
    s->central_name = "K";
    s->central_value = par.k();
    // Zero-mode PBW rank F < H < E so annihilators sit rightmost.
    s->families = {
        {"F", false, false, false, qq(-2), 0},
        {"H", false, false, false, qq(0), 1},
        {"E", false, false, false, qq(2), 2},
    };
    return s;
}

AlgebraPtr make_gl11() {
    auto s = std::make_shared<AlgebraSpec>();
    s->id = AlgebraId::Gl11;
    s->name = "gl11";
    s->central_name = "";
    s->central_value = 0;
    s->families = {
        {"Z", false, false, true, qq(0), 0},
        {"J", false, false, true, qq(0), 1},
        {"Psi-", true, false, true, qq(-1), 2},
        {"Psi+", true, false, true, qq(1), 3},
    };
    return s;
}

LinComb bracket_ns2(const AlgebraSpec& s, GeneratorMode x, GeneratorMode y) {
    LinComb out;
    const QQ c = s.central_value;
    const std::string& fx = s.fam(x).name;
    const std::string& fy = s.fam(y).name;
    const QQ n = x.mode(), m = y.mode();
    const int dsum = x.dmode + y.dmode;

    auto G = [&](const std::string& f, int dm) {
        return GeneratorMode{static_cast<uint8_t>(s.family_index(f)), dm};
    };

    if (fx == "L" && fy == "L") {
        out.add(G("L", dsum), n - m);
        if (dsum == 0) out.scalar = qq(1, 12) * (n * n * n - n) * c;
        return out;
    }
    if (fx == "L" && fy == "J") {
        out.add(G("J", dsum), -m);
        return out;
    }
    if (fx == "L" && (fy == "G+" || fy == "G-")) {
        out.add(G(fy, dsum), n / 2 - m);
        return out;
    }
    if (fx == "J" && fy == "J") {
        if (dsum == 0) out.scalar = (n / 3) * c;
        return out;
    }
    if (fx == "J" && (fy == "G+" || fy == "G-")) {
        out.add(G(fy, dsum), fy == "G+" ? qq(1) : qq(-1));
        return out;
    }
    if (fx == "G+" && fy == "G-") {
        out.add(G("L", dsum), qq(2));
        out.add(G("J", dsum), n - m);
        if (dsum == 0) out.scalar = qq(1, 3) * (n * n - qq(1, 4)) * c;
        return out;
    }
    if ((fx == "G+" && fy == "G+") || (fx == "G-" && fy == "G-")) return out;
    return out;  // remaining pairs resolved by antisymmetry in bracket()
}

LinComb bracket_affine(const AlgebraSpec& s, GeneratorMode x, GeneratorMode y) {
    LinComb out;
    const QQ k = s.central_value;
    const std::string& fx = s.fam(x).name;
    const std::string& fy = s.fam(y).name;
    const QQ n = x.mode(), m = y.mode();
    const int dsum = x.dmode + y.dmode;

    auto G = [&](const std::string& f, int dm) {
        return GeneratorMode{static_cast<uint8_t>(s.family_index(f)), dm};
    };

    // [X_n, Y_m] = [X,Y]_{n+m} + n (X|Y) d_{n+m,0} K with (E|F)=1, (H|H)=2.
    if (fx == "E" && fy == "F") {
        out.add(G("H", dsum), qq(1));
        if (dsum == 0) out.scalar = n * k;
        return out;
    }
    if (fx == "H" && fy == "E") {
        out.add(G("E", dsum), qq(2));
        return out;
    }
    if (fx == "H" && fy == "F") {
        out.add(G("F", dsum), qq(-2));
        return out;
    }
    if (fx == "H" && fy == "H") {
        if (dsum == 0) out.scalar = 2 * n * k;
        return out;
    }
    if ((fx == "E" && fy == "E") || (fx == "F" && fy == "F")) return out;
    return out;
}

LinComb bracket_gl11(const AlgebraSpec& s, GeneratorMode x, GeneratorMode y) {
    LinComb out;
    const std::string& fx = s.fam(x).name;
    const std::string& fy = s.fam(y).name;
    auto G = [&](const std::string& f) {
        return GeneratorMode{static_cast<uint8_t>(s.family_index(f)), 0};
    };
    if (fx == "Psi+" && fy == "Psi-") {
        out.add(G("Z"), qq(2));
        return out;
    }
    if (fx == "J" && fy == "Psi+") {
        out.add(G("Psi+"), qq(1));
        return out;
    }
    if (fx == "J" && fy == "Psi-") {
        out.add(G("Psi-"), qq(-1));
        return out;
    }
    return out;  // Z central, [J,J]=0, odd squares vanish
}

// Pairs handled directly by the per-algebra tables, i.e. (x,y) orders for
// which the table row exists.
bool table_primary(const AlgebraSpec& s, GeneratorMode x, GeneratorMode y) {
    const std::string& fx = s.fam(x).name;
    const std::string& fy = s.fam(y).name;
    switch (s.id) {
        case AlgebraId::Ns2:
            if (fx == fy) return true;
            if (fx == "L") return true;
            if (fx == "J" && fy != "L") return true;
            if (fx == "G+" && fy == "G-") return true;
            return false;
        case AlgebraId::AffineSl2:
            if (fx == fy) return true;
            if (fx == "H") return true;
            if (fx == "E" && fy == "F") return true;
            return false;
        case AlgebraId::Gl11:
            if (fx == fy) return true;
            if (fx == "Psi+" && fy == "Psi-") return true;
            if (fx == "J") return true;
            if (fx == "Z") return true;
            return false;
    }
    return false;
}

}  // namespace

AlgebraPtr build_algebra(AlgebraId id, const Parameters& params) {
    switch (id) {
        case AlgebraId::Ns2:
            return make_ns2(params);
        case AlgebraId::AffineSl2:
            if (params.k() == -2) throw std::invalid_argument("critical level k = -2");
            return make_affine(params);
        case AlgebraId::Gl11:
            return make_gl11();
    }
    throw std::invalid_argument("unknown algebra id");
}

AlgebraPtr build_algebra(const std::string& name, const Parameters& params) {
    if (name == "ns2") return build_algebra(AlgebraId::Ns2, params);
    if (name == "affine-sl2") return build_algebra(AlgebraId::AffineSl2, params);
    if (name == "gl11") return build_algebra(AlgebraId::Gl11, params);
    throw std::invalid_argument("unknown algebra '" + name + "'");
}

LinComb bracket(const AlgebraSpec& spec, GeneratorMode x, GeneratorMode y) {
    spec.validate_mode(x);
    spec.validate_mode(y);
    LinComb out;
    if (table_primary(spec, x, y)) {
        switch (spec.id) {
            case AlgebraId::Ns2: out = bracket_ns2(spec, x, y); break;
            case AlgebraId::AffineSl2: out = bracket_affine(spec, x, y); break;
            case AlgebraId::Gl11: out = bracket_gl11(spec, x, y); break;
        }
        return out;
    }
    // [x,y] = -(-1)^{|x||y|} [y,x]
    LinComb rev;
    switch (spec.id) {
        case AlgebraId::Ns2: rev = bracket_ns2(spec, y, x); break;
        case AlgebraId::AffineSl2: rev = bracket_affine(spec, y, x); break;
        case AlgebraId::Gl11: rev = bracket_gl11(spec, y, x); break;
    }
    const QQ sign = (spec.odd(x) && spec.odd(y)) ? qq(1) : qq(-1);
    for (auto& [key, cval] : rev.terms)
        out.terms[key] = sign * cval;
    out.scalar = sign * rev.scalar;
    return out;
}

std::vector<GeneratorMode> modes_in_window(const AlgebraSpec& spec, long window) {
    std::vector<GeneratorMode> out;
    for (int dm = -2 * static_cast<int>(window); dm <= 2 * static_cast<int>(window); ++dm) {
        for (std::size_t fi = 0; fi < spec.families.size(); ++fi) {
            const FamilyInfo& f = spec.families[fi];
            if (f.zero_only && dm != 0) continue;
            if (!f.zero_only && f.half_modes != ((dm & 1) != 0)) continue;
            out.push_back(GeneratorMode{static_cast<uint8_t>(fi), dm});
        }
    }
    return out;
}

namespace {

// Bracket of a generator with a linear combination (scalars drop out).
LinComb bracket_lin(const AlgebraSpec& s, const BracketFn& bf, GeneratorMode x,
                    const LinComb& y) {
    LinComb out;
    for (auto& [key, cval] : y.terms) {
        GeneratorMode g{key.second, key.first};
        LinComb b = bf(s, x, g);
        for (auto& [k2, c2] : b.terms) {
            auto [it, fresh] = out.terms.emplace(k2, cval * c2);
            if (!fresh) {
                it->second += cval * c2;
                if (it->second == 0) out.terms.erase(it);
            }
        }
        out.scalar += cval * b.scalar;
    }
    return out;
}

}  // namespace

JacobiReport check_super_jacobi(const AlgebraSpec& spec, long window,
                                const BracketFn& bf_in) {
    if (window < 1) throw std::invalid_argument("mode window must be >= 1");
    BracketFn bf = bf_in ? bf_in
                         : [](const AlgebraSpec& s, GeneratorMode a, GeneratorMode b) {
                               return bracket(s, a, b);
                           };
    JacobiReport rep;
    rep.algebra = spec.name;
    rep.window = window;

    auto all = modes_in_window(spec, window);
    for (auto& x : all)
        for (auto& y : all)
            for (auto& z : all) {
                // [x,[y,z]] - [[x,y],z] - (-1)^{|x||y|} [y,[x,z]] = 0
                LinComb t1 = bracket_lin(spec, bf, x, bf(spec, y, z));
                LinComb t2;
                {
                    LinComb xy = bf(spec, x, y);
                    for (auto& [key, cval] : xy.terms) {
                        GeneratorMode g{key.second, key.first};
                        LinComb b = bf(spec, g, z);
                        for (auto& [k2, c2] : b.terms) {
                            auto [it, fresh] = t2.terms.emplace(k2, cval * c2);
                            if (!fresh) {
                                it->second += cval * c2;
                                if (it->second == 0) t2.terms.erase(it);
                            }
                        }
                        t2.scalar += cval * b.scalar;
                    }
                }
                LinComb t3 = bracket_lin(spec, bf, y, bf(spec, x, z));
                const QQ s3 = (spec.odd(x) && spec.odd(y)) ? qq(-1) : qq(1);

                LinComb total = t1;
                for (auto& [key, cval] : t2.terms) {
                    auto [it, fresh] = total.terms.emplace(key, -cval);
                    if (!fresh) {
                        it->second -= cval;
                        if (it->second == 0) total.terms.erase(it);
                    }
                }
                total.scalar -= t2.scalar;
                for (auto& [key, cval] : t3.terms) {
                    auto [it, fresh] = total.terms.emplace(key, -s3 * cval);
                    if (!fresh) {
                        it->second -= s3 * cval;
                        if (it->second == 0) total.terms.erase(it);
                    }
                }
                total.scalar -= s3 * t3.scalar;

                ++rep.triples_checked;
                if (!total.zero()) {
                    std::string d = spec.fam(x).name + "_" + qq_str(x.mode()) + ", " +
                                    spec.fam(y).name + "_" + qq_str(y.mode()) + ", " +
                                    spec.fam(z).name + "_" + qq_str(z.mode());
                    rep.violations.push_back({x, y, z, d});
                }
            }
    return rep;
}

bool check_antisymmetry(const AlgebraSpec& spec, long window) {
    auto all = modes_in_window(spec, window);
    for (auto& x : all)
        for (auto& y : all) {
            LinComb a = bracket(spec, x, y);
            LinComb b = bracket(spec, y, x);
            const QQ sign = (spec.odd(x) && spec.odd(y)) ? qq(1) : qq(-1);
            LinComb sum = a;
            for (auto& [key, cval] : b.terms) {
                auto [it, fresh] = sum.terms.emplace(key, -sign * cval);
                if (!fresh) {
                    it->second -= sign * cval;
                    if (it->second == 0) sum.terms.erase(it);
                }
            }
            sum.scalar -= sign * b.scalar;
            if (!sum.zero()) return false;
        }
    return true;
}

LinComb spectral_flow_generator(const AlgebraSpec& spec, int dtheta, GeneratorMode x) {
    if (spec.id != AlgebraId::Ns2)
        throw std::invalid_argument("spectral flow is defined on ns2 only");
    spec.validate_mode(x);
    const QQ th = qq(dtheta, 2);
    const QQ c = spec.central_value;
    const std::string& f = spec.fam(x).name;
    LinComb out;
    if (f == "L") {
        out.add(x, qq(1));
        out.add(GeneratorMode{static_cast<uint8_t>(spec.family_index("J")), x.dmode}, th);
        if (x.dmode == 0) out.scalar = th * th * c / 6;
        return out;
    }
    if (f == "J") {
        out.add(x, qq(1));
        if (x.dmode == 0) out.scalar = th * c / 3;
        return out;
    }
    if (f == "G+" || f == "G-") {
        if (dtheta % 2 != 0)
            throw std::invalid_argument(
                "half-integer flow leaves the NS mode lattice; only characters "
                "support half-step flow");
        const int shift = f == "G+" ? dtheta : -dtheta;
        out.add(GeneratorMode{x.fam, x.dmode + shift}, qq(1));
        return out;
    }
    throw std::invalid_argument("unknown family");
}

}  // namespace n2
