#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>

#include "doctest.h"
#include "n2/algebra.hpp"

using namespace n2;

namespace {

QQ coeff_of(const LinComb& lc, const AlgebraSpec& s, const std::string& fam, const QQ& mode) {
    GeneratorMode g = s.gen(fam, mode);
    auto it = lc.terms.find({g.dmode, g.fam});
    return it == lc.terms.end() ? QQ(0) : it->second;
}

// U_theta extended to linear combinations.
LinComb flow_lin(const AlgebraSpec& s, int dtheta, const LinComb& x) {
    LinComb out;
    for (auto& [key, c] : x.terms) {
        LinComb f = spectral_flow_generator(s, dtheta, GeneratorMode{key.second, key.first});
        for (auto& [k2, c2] : f.terms) {
            auto [it, fresh] = out.terms.emplace(k2, c * c2);
            if (!fresh) {
                it->second += c * c2;
                if (it->second == 0) out.terms.erase(it);
            }
        }
        out.scalar += c * f.scalar;
    }
    out.scalar += x.scalar;
    return out;
}

LinComb bracket_lin2(const AlgebraSpec& s, const LinComb& a, const LinComb& b) {
    LinComb out;
    for (auto& [ka, ca] : a.terms)
        for (auto& [kb, cb] : b.terms) {
            LinComb t = bracket(s, GeneratorMode{ka.second, ka.first},
                                GeneratorMode{kb.second, kb.first});
            for (auto& [k2, c2] : t.terms) {
                auto [it, fresh] = out.terms.emplace(k2, ca * cb * c2);
                if (!fresh) {
                    it->second += ca * cb * c2;
                    if (it->second == 0) out.terms.erase(it);
                }
            }
            out.scalar += ca * cb * t.scalar;
        }
    return out;
}

bool lin_eq(const LinComb& a, const LinComb& b) {
    return a.terms == b.terms && a.scalar == b.scalar;
}

}  // namespace

TEST_CASE("central bindings") {
    auto par32 = Parameters::make(3, 2);
    auto ns2 = build_algebra(AlgebraId::Ns2, par32);
    CHECK(ns2->central_value == qq(-1));  // c_{3,2} = -1

    auto aff = build_algebra(AlgebraId::AffineSl2, par32);
    CHECK(aff->central_value == qq(-1, 2));  // k = -2 + 3/2

    auto par41 = Parameters::make(4, 1);
    CHECK(build_algebra(AlgebraId::Ns2, par41)->central_value == qq(3, 2));
    auto par23 = Parameters::make(2, 3);
    CHECK(build_algebra(AlgebraId::Ns2, par23)->central_value == qq(-6));

    auto gl = build_algebra(AlgebraId::Gl11, par32);
    CHECK(gl->families.size() == 4);
    int odd = 0;
    for (auto& f : gl->families) odd += f.odd;
    CHECK(odd == 2);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS(Parameters::make(1, 1));
    CHECK_THROWS(Parameters::make(4, 2));  // not coprime
    CHECK_THROWS(Parameters::make(3, 0));
    CHECK_NOTHROW(Parameters::make(2, 1));
}

TEST_CASE("ns2 brackets: displayed relations") {
    auto s = build_algebra(AlgebraId::Ns2, Parameters::make(3, 2));
    // [G+_{1/2}, G-_{-1/2}] = 2L_0 + J_0, central term vanishes
    LinComb b = bracket(*s, s->gen("G+", qq(1, 2)), s->gen("G-", qq(-1, 2)));
    CHECK(coeff_of(b, *s, "L", qq(0)) == 2);
    CHECK(coeff_of(b, *s, "J", qq(0)) == 1);
    CHECK(b.scalar == 0);

    // [G+_r, G+_s] = 0
    CHECK(bracket(*s, s->gen("G+", qq(3, 2)), s->gen("G+", qq(-5, 2))).zero());
    CHECK(bracket(*s, s->gen("G-", qq(1, 2)), s->gen("G-", qq(1, 2))).zero());

    // [L_2, L_{-2}] = 4L_0 + (1/2)C with C bound to c
    LinComb l = bracket(*s, s->gen("L", qq(2)), s->gen("L", qq(-2)));
    CHECK(coeff_of(l, *s, "L", qq(0)) == 4);
    CHECK(l.scalar == s->central_value / 2);

    // antisymmetry through the derived half of the table
    LinComb r = bracket(*s, s->gen("G-", qq(-1, 2)), s->gen("G+", qq(1, 2)));
    CHECK(coeff_of(r, *s, "L", qq(0)) == 2);  // anticommutator: same sign
    CHECK(coeff_of(r, *s, "J", qq(0)) == 1);
}

TEST_CASE("gl11 bracket against the supermatrix oracle") {
    auto s = build_algebra(AlgebraId::Gl11, Parameters::make(3, 2));
    // 2x2 matrices over Q: index (row, col); parity of Psi+- odd.
    using Mat = std::array<std::array<QQ, 2>, 2>;
    auto mat = [&](const std::string& f) -> Mat {
        if (f == "Z") return {{{qq(1, 2), 0}, {0, qq(1, 2)}}};
        if (f == "J") return {{{qq(1, 2), 0}, {0, qq(-1, 2)}}};
        if (f == "Psi+") return {{{0, qq(1)}, {0, 0}}};
        return {{{0, 0}, {qq(1), 0}}};  // Psi-
    };
    auto mul = [](const Mat& a, const Mat& b) {
        Mat c{{{0, 0}, {0, 0}}};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) c[i][j] += a[i][k] * b[k][j];
        return c;
    };
    const std::array<std::string, 4> names{"Z", "J", "Psi-", "Psi+"};
    for (auto& fx : names)
        for (auto& fy : names) {
            GeneratorMode x = s->gen(fx, qq(0)), y = s->gen(fy, qq(0));
            const bool both_odd = s->odd(x) && s->odd(y);
            Mat ab = mul(mat(fx), mat(fy)), ba = mul(mat(fy), mat(fx));
            Mat expect{{{0, 0}, {0, 0}}};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    expect[i][j] = both_odd ? QQ(ab[i][j] + ba[i][j]) : QQ(ab[i][j] - ba[i][j]);
            LinComb br = bracket(*s, x, y);
            Mat got{{{0, 0}, {0, 0}}};
            for (auto& [k, c] : br.terms) {
                Mat g = mat(s->families[k.second].name);
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) got[i][j] += c * g[i][j];
            }
            CHECK(br.scalar == 0);
            CHECK(got == expect);
        }
    // the display: {Psi+, Psi-} = 2Z
    LinComb b = bracket(*s, s->gen("Psi+", qq(0)), s->gen("Psi-", qq(0)));
    CHECK(coeff_of(b, *s, "Z", qq(0)) == 2);
}

TEST_CASE("super-Jacobi window 4 for all three algebras") {
    auto par = Parameters::make(3, 2);
    for (auto id : {AlgebraId::Ns2, AlgebraId::AffineSl2, AlgebraId::Gl11}) {
        auto s = build_algebra(id, par);
        auto rep = check_super_jacobi(*s, 4);
        CHECK(rep.ok());
        CHECK(rep.triples_checked > 0);
    }
}

TEST_CASE("corrupted bracket table is detected") {
    auto s = build_algebra(AlgebraId::Ns2, Parameters::make(3, 2));
    BracketFn bad = [](const AlgebraSpec& sp, GeneratorMode x, GeneratorMode y) {
        LinComb b = bracket(sp, x, y);
        // flip the sign of [L_n, J_m]
        if (sp.fam(x).name == "L" && sp.fam(y).name == "J") {
            for (auto& [k, c] : b.terms) c = -c;
            b.scalar = -b.scalar;
        }
        return b;
    };
    auto rep = check_super_jacobi(*s, 2, bad);
    CHECK(!rep.ok());
}

TEST_CASE("super-antisymmetry in window 6") {
    auto par = Parameters::make(3, 2);
    for (auto id : {AlgebraId::Ns2, AlgebraId::AffineSl2, AlgebraId::Gl11})
        CHECK(check_antisymmetry(*build_algebra(id, par), 6));
}

TEST_CASE("spectral flow: identity, constants, automorphism, composition") {
    auto s = build_algebra(AlgebraId::Ns2, Parameters::make(3, 2));
    const QQ c = s->central_value;

    for (auto m : modes_in_window(*s, 3)) {
        LinComb u0 = spectral_flow_generator(*s, 0, m);
        LinComb expect;
        expect.add(m, qq(1));
        CHECK(lin_eq(u0, expect));
    }

    // U_1(J_0) = J_0 + (c/3) 1
    LinComb uj = spectral_flow_generator(*s, 2, s->gen("J", qq(0)));
    CHECK(coeff_of(uj, *s, "J", qq(0)) == 1);
    CHECK(uj.scalar == c / 3);

    // automorphism and composition over theta in {-2,...,2}, window 4
    auto modes = modes_in_window(*s, 4);
    for (int t = -2; t <= 2; ++t) {
        const int dt = 2 * t;
        for (auto& x : modes)
            for (auto& y : modes) {
                LinComb lhs = flow_lin(*s, dt, bracket(*s, x, y));
                LinComb rhs = bracket_lin2(*s, spectral_flow_generator(*s, dt, x),
                                           spectral_flow_generator(*s, dt, y));
                CHECK(lin_eq(lhs, rhs));
            }
        for (int t2 = -2; t2 <= 2; ++t2) {
            const int dt2 = 2 * t2;
            for (auto& x : modes) {
                LinComb a = flow_lin(*s, dt, spectral_flow_generator(*s, dt2, x));
                LinComb b = spectral_flow_generator(*s, dt + dt2, x);
                CHECK(lin_eq(a, b));
            }
        }
    }

    // parity preserved: G modes stay G modes with shifted index
    LinComb g = spectral_flow_generator(*s, 2, s->gen("G+", qq(-1, 2)));
    REQUIRE(g.terms.size() == 1);
    CHECK(g.terms.begin()->first == std::make_pair(1, uint8_t(s->family_index("G+"))));
}

TEST_CASE("mode lattice validation") {
    auto s = build_algebra(AlgebraId::Ns2, Parameters::make(3, 2));
    CHECK_THROWS(s->gen("L", qq(1, 2)));
    CHECK_THROWS(s->gen("G+", qq(1)));
    CHECK_THROWS(build_algebra("nope", Parameters::make(3, 2)));
    auto gl = build_algebra(AlgebraId::Gl11, Parameters::make(3, 2));
    CHECK_THROWS(gl->gen("Z", qq(1)));
}
