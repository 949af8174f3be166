#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "n2/fz.hpp"

using namespace n2;

namespace {

FZContextPtr ctx32() {
    static FZContextPtr c = FZContext::make(Parameters::make(3, 2), qq(2, 3));
    return c;
}

ModuleElem from_words(const FZContextPtr& c, const std::string& words) {
    EnvElement e = parse_words(c->chiral()->alg(), words);
    return c->chiral()->apply_env(e, c->chiral()->cyclic());
}

// The id-twisted quotient polynomials of L_{-1}, computed once.
std::pair<Poly, Poly> fc_gc() {
    static std::pair<Poly, Poly> val = [] {
        auto zctx = ZhuContext::build(Twist::Id, Parameters::make(3, 2), qq(5));
        auto V = zctx->vacuum();
        EnvElement n32 = parse_words(
            V->alg(),
            "42 J(-4) + 24 L(-4) + 27 J(-2)^2 - 84 J(-3) J(-1)"
            " - 6 G+(-3/2) G-(-5/2) + 6 G+(-5/2) G-(-3/2) - 32 L(-2)^2"
            " - 36 L(-3) J(-1) + 36 J(-1) G+(-3/2) G-(-3/2) + 12 L(-2) J(-1)^2 + 9 J(-1)^4");
        ModuleElem N = V->apply_env(n32, V->cyclic());
        EnvElement gg = parse_words(V->alg(), "G+(-1/2) G-(-1/2)");
        ModuleElem GN = V->apply_env(gg, N);
        return std::make_pair(coset_to_poly(zctx, zctx->reduce(N)),
                              coset_to_poly(zctx, zctx->reduce(GN)));
    }();
    return val;
}

}  // namespace

TEST_CASE("fz_reduce maps the generators of the bimodule") {
    auto c = ctx32();
    FZElement one = c->reduce(c->chiral()->cyclic());
    CHECK(one.f == Poly::constant(1));
    CHECK(one.g.zero());

    FZElement psi = c->reduce(from_words(c, "G-(-1/2)"));
    CHECK(psi.f.zero());
    CHECK(psi.g == Poly::constant(1));
}

TEST_CASE("bimodule axiom instance: left h and right q commute") {
    auto c = ctx32();
    ModuleElem base = c->chiral()->cyclic();
    ModuleElem a = c->left_h(c->right_q(base));
    ModuleElem b = c->right_q(c->left_h(base));
    FZElement ra = c->reduce(a), rb = c->reduce(b);
    CHECK(ra.f == rb.f);
    CHECK(ra.g == rb.g);
    // and the value is x_l y
    CHECK(ra.f == Poly::var(0) * Poly::var(2));
    CHECK(ra.g.zero());
}

TEST_CASE("fz_reduce agrees with the star actions on random vectors") {
    auto c = ctx32();
    auto pres = c->chiral();
    std::mt19937 rng(31);
    auto modes = modes_in_window(pres->alg(), 2);
    // lowering modes only, to build vectors of bounded degree
    std::vector<GeneratorMode> low;
    for (auto& g : modes)
        if (g.dmode < 0) low.push_back(g);
    std::uniform_int_distribution<std::size_t> pick(0, low.size() - 1);
    std::uniform_int_distribution<int> len(0, 3);

    const Poly xl = Poly::var(0), xr = Poly::var(1), y = Poly::var(2);
    const QQ j = c->j();
    int done = 0;
    while (done < 30) {
        RawWord w;
        w.coeff = 1;
        const int L = len(rng);
        for (int i = 0; i < L; ++i) w.letters.push_back(low[pick(rng)]);
        EnvElement e = normal_order(pres->alg(), {w});
        if (e.zero()) continue;
        ModuleElem v = pres->apply_env(e, pres->cyclic());
        if (v.zero()) continue;
        QQ lv(0);
        for (auto& [m, cc] : v.c) lv = std::max(lv, pres->weight_of(m).level);
        if (lv > qq(3)) continue;
        ++done;

        FZElement rv = c->reduce(v);
        // left h multiplies by x_l on both parts
        FZElement lh = c->reduce(c->left_h(v));
        CHECK(lh.f == xl * rv.f);
        CHECK(lh.g == xl * rv.g);
        // right h multiplies by x_r
        FZElement rh = c->reduce(c->right_h(v));
        CHECK(rh.f == xr * rv.f);
        CHECK(rh.g == xr * rv.g);
        // right q multiplies by y
        FZElement rq = c->reduce(c->right_q(v));
        CHECK(rq.f == y * rv.f);
        CHECK(rq.g == y * rv.g);
        // left q acts by (y + j) on the even part, (y + j - 1) on the odd
        ModuleElem Jf;
        {
            PbwMonomial m;
            m.factors.push_back({c->vacuum()->alg().gen("J", qq(-1)), 1});
            Jf.c[m] = 1;
        }
        ModuleElem lq = zhu_star_left(Twist::Id, c->vacuum(), pres, Jf, v);
        FZElement rlq = c->reduce(lq);
        CHECK(rlq.f == (y + Poly::constant(j)) * rv.f);
        CHECK(rlq.g == (y + Poly::constant(j - 1)) * rv.g);
    }
}

TEST_CASE("the six kernel cosets are proportional to the stated generators") {
    auto c = ctx32();
    FZKernel ker = fz_kernel_generators();

    ModuleElem w1 = from_words(c, "G-(-3/2) G-(-1/2)");
    ModuleElem w2 =
        from_words(c, "4 J(-2) - 3 G+(-3/2) G-(-1/2) - 2 L(-1) J(-1) - 2 J(-1)^2 + 4 L(-1)^2");

    auto apply = [&](const std::string& words, const ModuleElem& v) {
        EnvElement e = parse_words(c->chiral()->alg(), words);
        return c->chiral()->apply_env(e, v);
    };

    struct Case {
        ModuleElem v;
        const Poly* even;
        const Poly* odd;
        const char* label;
    };
    const std::vector<Case> cases = {
        {apply("G+(-1/2) G+(1/2)", w1), &ker.f[0], nullptr, "f1"},
        {w2, &ker.f[1], nullptr, "f2"},
        {apply("G+(-1/2) G-(-1/2)", w2), &ker.f[2], nullptr, "f3"},
        {apply("G+(1/2)", w1), nullptr, &ker.g[0], "g1"},
        {apply("G+(-1/2)", w1), nullptr, &ker.g[1], "g2"},
        {apply("G-(-1/2)", w2), nullptr, &ker.g[2], "g3"},
    };
    for (auto& cs : cases) {
        CAPTURE(cs.label);
        REQUIRE(!cs.v.zero());
        FZElement red = c->reduce(cs.v);
        FZElement expect;
        if (cs.even) expect.f = *cs.even;
        if (cs.odd) expect.g = *cs.odd;
        CHECK(red.proportional_to(expect));
    }
}

TEST_CASE("right-module eigenvalues are derived, not hard-coded") {
    auto par = Parameters::make(3, 2);
    FusionRight r;
    r.kind = FusionRight::Kind::Eps;
    r.eps = 0;
    CHECK(fusion_right_eigenvalues(par, r) == std::make_pair(qq(0), qq(0)));
    r.eps = 1;
    CHECK(fusion_right_eigenvalues(par, r) == std::make_pair(qq(1, 3), qq(2, 3)));
    r.eps = -1;
    CHECK(fusion_right_eigenvalues(par, r) == std::make_pair(qq(1, 3), qq(-2, 3)));
    r.kind = FusionRight::Kind::Jline;
    r.j = qq(0);
    CHECK(fusion_right_eigenvalues(par, r) == std::make_pair(qq(-1, 8), qq(0)));
    r.j = qq(-1, 3);
    CHECK(fusion_right_eigenvalues(par, r) == std::make_pair(qq(-1, 6), qq(-1, 3)));
}

TEST_CASE("fusion: every line of the tensor table") {
    auto par = Parameters::make(3, 2);
    auto [fc, gc] = fc_gc();

    auto run = [&](FusionRight r) { return fz_kernel_and_fusion(par, r, fc, gc); };

    // C(-1) -> C(0)
    {
        FusionRight r;
        r.kind = FusionRight::Kind::Eps;
        r.eps = -1;
        auto rep = run(r);
        REQUIRE(rep.dimension == 1);
        CHECK(rep.unfactored_degree == 0);
        CHECK(rep.summands[0].xl == qq(0));
        CHECK(rep.summands[0].ql == qq(0));
        CHECK(rep.summands[0].parity == 0);
        CHECK(rep.summands[0].name == "C(0)");
    }
    // C(0) -> C(1)
    {
        FusionRight r;
        r.kind = FusionRight::Kind::Eps;
        r.eps = 0;
        auto rep = run(r);
        REQUIRE(rep.dimension == 1);
        CHECK(rep.summands[0].xl == qq(1, 3));
        CHECK(rep.summands[0].ql == qq(2, 3));
        CHECK(rep.summands[0].parity == 0);
        CHECK(rep.summands[0].name == "C(1)");
    }
    // C(1) -> Pi C_{1/3}
    {
        FusionRight r;
        r.kind = FusionRight::Kind::Eps;
        r.eps = 1;
        auto rep = run(r);
        REQUIRE(rep.dimension == 1);
        CHECK(rep.summands[0].xl == qq(-1, 6));
        CHECK(rep.summands[0].ql == qq(1, 3));
        CHECK(rep.summands[0].parity == 1);
        CHECK(rep.summands[0].name == "Pi C_{1/3}");
    }
    // C_j, j = 0: -> C_{2/3} with x_l = -7/24
    {
        FusionRight r;
        r.kind = FusionRight::Kind::Jline;
        r.j = qq(0);
        auto rep = run(r);
        REQUIRE(rep.dimension == 1);
        CHECK(rep.summands[0].xl == qq(-7, 24));
        CHECK(rep.summands[0].ql == qq(2, 3));
        CHECK(rep.summands[0].parity == 0);
        CHECK(rep.summands[0].name == "C_{2/3}");
    }
    // C_j, j = 1/2 (generic): -> C_{7/6}
    {
        FusionRight r;
        r.kind = FusionRight::Kind::Jline;
        r.j = qq(1, 2);
        auto rep = run(r);
        REQUIRE(rep.dimension == 1);
        CHECK(rep.summands[0].ql == qq(7, 6));
        CHECK(rep.summands[0].xl == qq(-61, 96));
        CHECK(rep.summands[0].name == "C_{7/6}");
    }
    // C_{-1/3}: -> C_{1/3} (+) Pi C(-1)
    {
        FusionRight r;
        r.kind = FusionRight::Kind::Jline;
        r.j = qq(-1, 3);
        auto rep = run(r);
        REQUIRE(rep.dimension == 2);
        bool saw_c13 = false, saw_pim1 = false;
        for (auto& s : rep.summands) {
            if (s.xl == qq(-1, 6) && s.ql == qq(1, 3) && s.parity == 0 &&
                s.name == "C_{1/3}")
                saw_c13 = true;
            if (s.xl == qq(1, 3) && s.ql == qq(-2, 3) && s.parity == 1 &&
                s.name == "Pi C(-1)")
                saw_pim1 = true;
        }
        CHECK(saw_c13);
        CHECK(saw_pim1);
    }
    // Pi-twisted right module flips parities
    {
        FusionRight r;
        r.kind = FusionRight::Kind::Eps;
        r.eps = 0;
        r.parity_flip = true;
        auto rep = run(r);
        REQUIRE(rep.dimension == 1);
        CHECK(rep.summands[0].parity == 1);
        CHECK(rep.summands[0].name == "Pi C(1)");
    }
    // invalid right module: (h, q) off the variety
    {
        FusionRight r;
        r.kind = FusionRight::Kind::Eps;
        r.eps = 0;
        Poly bad = Poly::constant(1);
        CHECK_THROWS(fz_kernel_and_fusion(par, r, bad, gc));
    }
}
