#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "n2/modules.hpp"

using namespace n2;

namespace {

PresentationPtr vacuum(long p, long pp) {
    PresentSpec ps;
    ps.kind = ModuleKind::VacuumNs2;
    ps.params = Parameters::make(p, pp);
    return present_module(ps);
}

PresentationPtr gen_verma(long p, long pp, long m) {
    PresentSpec ps;
    ps.kind = ModuleKind::GenVermaNs2;
    ps.params = Parameters::make(p, pp);
    ps.m = m;
    return present_module(ps);
}

PresentationPtr verma_ns2(long p, long pp, const QQ& h, const QQ& j) {
    PresentSpec ps;
    ps.kind = ModuleKind::VermaNs2;
    ps.params = Parameters::make(p, pp);
    ps.h = h;
    ps.j = j;
    return present_module(ps);
}

ModuleVector cyc_vec(const PresentationPtr& p) { return p->to_coords(p->cyclic()); }

// Paper vector applied to the cyclic vector, as module coordinates.
ModuleVector paper_vector(const PresentationPtr& p, const std::string& words) {
    EnvElement e = parse_words(p->alg(), words);
    ModuleElem v = p->apply_env(e, p->cyclic());
    return p->to_coords(p->reduce(v));
}

bool proportional(const ModuleVector& a, const ModuleVector& b) {
    REQUIRE(a.coords.size() == b.coords.size());
    QQ s(0);
    for (std::size_t i = 0; i < a.coords.size(); ++i) {
        if ((a.coords[i] == 0) != (b.coords[i] == 0)) return false;
        if (a.coords[i] != 0 && s == 0) s = b.coords[i] / a.coords[i];
    }
    if (s == 0) return true;  // both zero
    for (std::size_t i = 0; i < a.coords.size(); ++i)
        if (a.coords[i] * s != b.coords[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("vacuum basics: dims and the derived L_{-1} null") {
    auto V = vacuum(3, 2);
    CHECK(V->dim({qq(0), qq(0)}) == 1);
    CHECK(V->dim({qq(1, 2), qq(1)}) == 0);   // G+-(-1/2) killed
    CHECK(V->dim({qq(1, 2), qq(-1)}) == 0);
    CHECK(V->dim({qq(1), qq(0)}) == 1);      // J_{-1} only: L_{-1}1 = 0
    CHECK(V->dim({qq(3, 2), qq(1)}) == 1);   // G+_{-3/2}
    CHECK(V->dim({qq(3, 2), qq(-1)}) == 1);

    auto Lm1 = EnvElement::generator(V->alg().gen("L", qq(-1)));
    CHECK(act(V, Lm1, cyc_vec(V)).zero());
}

TEST_CASE("Verma weight spaces match the PBW enumeration oracle") {
    auto M = verma_ns2(3, 2, qq(7, 5), qq(3, 7));
    CHECK(M->dim({qq(1), M->head_charge()}) == 3);
    CHECK(M->dim({qq(1, 2), M->head_charge() + 1}) == 1);
    CHECK(M->dim({qq(1, 2), M->head_charge() - 1}) == 1);

    Truncation tr;
    tr.max_level = qq(4);
    auto ch = closed_form_character(ModuleKind::VermaNs2, M->spec().params, M->head_level(),
                                    M->head_charge(), tr);
    for (long dl = 0; dl <= 8; ++dl)
        for (long q = -dl; q <= dl; ++q) {
            Weight w{qq(dl, 2), M->head_charge() + q};
            Weight abs{M->head_level() + qq(dl, 2), M->head_charge() + q};
            long expect = ch.dim.count(abs) ? ch.dim.at(abs) : 0;
            CHECK(M->dim(w) == expect);
        }
}

TEST_CASE("present_module: gen-verma specifics") {
    auto V1 = gen_verma(3, 2, 1);
    auto VC = vacuum(3, 2);
    CHECK(V1->head_level() == 0);
    CHECK(V1->head_charge() == 0);
    for (long dl = 0; dl <= 6; ++dl)
        for (long q = -3; q <= 3; ++q)
            CHECK(V1->dim({qq(dl, 2), qq(q)}) == VC->dim({qq(dl, 2), qq(q)}));

    auto V2 = gen_verma(3, 2, 2);
    CHECK(V2->head_level() == qq(1, 3));
    CHECK(V2->head_charge() == qq(2, 3));

    REQUIRE(V2->stated_relations().size() == 2);
    CHECK(V2->stated_relations()[1].terms.begin()->first.factors.size() == 2);

    PresentSpec bad;
    bad.kind = ModuleKind::ChiralVermaNs2;
    bad.params = Parameters::make(3, 2);
    bad.j = qq(2, 3);
    bad.h = qq(1);
    CHECK_THROWS(present_module(bad));
}

TEST_CASE("gen-verma quotient is smaller than the chiral span") {
    auto V2 = gen_verma(3, 2, 2);
    PresentSpec ps;
    ps.kind = ModuleKind::ChiralVermaNs2;
    ps.params = Parameters::make(3, 2);
    ps.j = V2->head_charge();
    auto chiral = present_module(ps);
    const Weight w{qq(3, 2), V2->head_charge() - 1};
    CHECK(chiral->dim(w) == 3);
    CHECK(V2->dim(w) == 2);
}

TEST_CASE("relaxed Verma: zero-mode Casimir relation by the Sugawara oracle") {
    PresentSpec ps;
    ps.kind = ModuleKind::RelaxedVermaAffine;
    ps.params = Parameters::make(3, 2);  // k = -1/2
    ps.h = qq(7, 11);
    ps.j = qq(2, 5);
    ps.trunc.charge_window = qq(12);
    auto R = present_module(ps);

    const AlgebraSpec& a = R->alg();
    EnvElement cas;
    cas += multiply(a, EnvElement::generator(a.gen("E", qq(0))),
                    EnvElement::generator(a.gen("F", qq(0))));
    cas += multiply(a, EnvElement::generator(a.gen("F", qq(0))),
                    EnvElement::generator(a.gen("E", qq(0))));
    EnvElement h2 = multiply(a, EnvElement::generator(a.gen("H", qq(0))),
                             EnvElement::generator(a.gen("H", qq(0))));
    h2 *= qq(1, 2);
    cas += h2;
    ModuleVector out = act(R, cas, cyc_vec(R));
    const QQ expected = 2 * (ps.params.k() + 2) * ps.h;
    REQUIRE(out.coords.size() == 1);
    CHECK(out.coords[0] == expected);

    CHECK(R->dim({qq(0), R->head_charge()}) == 1);
    CHECK(R->dim({qq(0), R->head_charge() + 2}) == 1);
    CHECK(R->dim({qq(0), R->head_charge() - 4}) == 1);
    CHECK(R->dim({qq(1), R->head_charge()}) == 3);

    PresentSpec nowin = ps;
    nowin.trunc.charge_window.reset();
    auto R2 = present_module(nowin);
    CHECK_THROWS(R2->dim({qq(0), R2->head_charge()}));
}

TEST_CASE("act is an algebra action (sampled)") {
    auto V = vacuum(3, 2);
    std::mt19937 rng(21);
    auto modes = modes_in_window(V->alg(), 2);
    std::uniform_int_distribution<std::size_t> pick(0, modes.size() - 1);
    std::uniform_int_distribution<int> len(1, 3);
    auto base = paper_vector(V, "J(-1)");
    for (int trial = 0; trial < 30; ++trial) {
        RawWord wx, wy;
        wx.coeff = 1;
        wy.coeff = 1;
        for (int i = 0; i < len(rng); ++i) wx.letters.push_back(modes[pick(rng)]);
        for (int i = 0; i < len(rng); ++i) wy.letters.push_back(modes[pick(rng)]);
        EnvElement x = normal_order(V->alg(), {wx});
        EnvElement y = normal_order(V->alg(), {wy});
        if (x.zero() || y.zero()) continue;
        ModuleVector lhs = act(V, multiply(V->alg(), x, y), base);
        ModuleVector rhs = act(V, x, act(V, y, base));
        if (lhs.zero() || rhs.zero()) {
            CHECK(lhs.zero() == rhs.zero());
        } else {
            CHECK(lhs.w.level == rhs.w.level);
            CHECK(lhs.coords == rhs.coords);
        }
    }
}

TEST_CASE("the three explicit singular vectors are found, uniquely") {
    struct Case {
        long p, pp;
        QQ level;
        std::string words;
    };
    const std::vector<Case> cases = {
        {4, 1, qq(3),
         "10 J(-3) - 3 L(-3) + 3 G+(-3/2) G-(-3/2) - 12 L(-2) J(-1) + 8 J(-1)^3"},
        {2, 3, qq(3),
         "-10 J(-3) - 6 L(-3) + 6 G+(-3/2) G-(-3/2) + 6 L(-2) J(-1) + J(-1)^3"},
        {3, 2, qq(4),
         "42 J(-4) + 24 L(-4) + 27 J(-2)^2 - 84 J(-3) J(-1)"
         " - 6 G+(-3/2) G-(-5/2) + 6 G+(-5/2) G-(-3/2) - 32 L(-2)^2"
         " - 36 L(-3) J(-1) + 36 J(-1) G+(-3/2) G-(-3/2) + 12 L(-2) J(-1)^2 + 9 J(-1)^4"},
    };
    for (auto& cs : cases) {
        CAPTURE(cs.p);
        CAPTURE(cs.pp);
        auto V = vacuum(cs.p, cs.pp);
        CHECK(cs.level == qq((cs.p - 1) * cs.pp));
        auto found = find_singular(V, {cs.level, qq(0)});
        REQUIRE(found.size() == 1);
        ModuleVector paper = paper_vector(V, cs.words);
        CHECK(proportional(found[0], paper));

        auto J1 = EnvElement::generator(V->alg().gen("J", qq(1)));
        CHECK(act(V, J1, found[0]).zero());
        auto Gp = EnvElement::generator(V->alg().gen("G+", qq(1, 2)));
        CHECK(act(V, Gp, found[0]).zero());
    }
}

TEST_CASE("nullspace dimension 1 at the uniqueness weights") {
    const std::vector<std::array<long, 3>> cases = {{4, 1, 1}, {2, 3, 1}, {3, 2, 1}, {3, 2, 2}};
    for (auto& c : cases) {
        const long p = c[0], pp = c[1], r = c[2];
        CAPTURE(p);
        CAPTURE(pp);
        CAPTURE(r);
        auto V = gen_verma(p, pp, r);
        const QQ rel_level = qq((p - r) * pp);
        auto found = find_singular(V, {rel_level, V->head_charge()});
        CHECK(found.size() == 1);
    }
}

TEST_CASE("level-0 scan returns exactly the cyclic vector") {
    auto V = vacuum(3, 2);
    auto found = find_singular(V, {qq(0), qq(0)});
    REQUIRE(found.size() == 1);
    CHECK(found[0].coords == std::vector<QQ>{qq(1)});
}

TEST_CASE("w2 is singular in the chiral Verma at (2/3, -1)") {
    PresentSpec ps;
    ps.kind = ModuleKind::ChiralVermaNs2;
    ps.params = Parameters::make(3, 2);
    ps.j = qq(2, 3);
    auto M = present_module(ps);
    auto found = find_singular(M, {qq(2), qq(2, 3)});
    REQUIRE(found.size() == 1);
    ModuleVector w2 = paper_vector(
        M, "4 J(-2) - 3 G+(-3/2) G-(-1/2) - 2 L(-1) J(-1) - 2 J(-1)^2 + 4 L(-1)^2");
    CHECK(proportional(found[0], w2));
}

TEST_CASE("MFF vector for p' = 1") {
    {
        auto par = Parameters::make(2, 1);
        EnvElement v = mff_vector(par, 1);
        PresentSpec ps;
        ps.kind = ModuleKind::GenVermaAffine;
        ps.params = par;
        ps.m = 1;
        auto V = present_module(ps);
        ModuleVector mv = act(V, v, cyc_vec(V));
        CHECK(!mv.zero());
        auto E0 = EnvElement::generator(V->alg().gen("E", qq(0)));
        CHECK(act(V, E0, mv).zero());
    }
    {
        auto par = Parameters::make(4, 1);
        EnvElement v = mff_vector(par, 1);
        PresentSpec ps;
        ps.kind = ModuleKind::GenVermaAffine;
        ps.params = par;
        ps.m = 1;
        auto V = present_module(ps);
        ModuleVector mv = act(V, v, cyc_vec(V));
        CHECK(mv.w.level == qq(3));
        CHECK(mv.w.charge == qq(6));
        auto found = find_singular(V, mv.w);
        REQUIRE(found.size() == 1);
        CHECK(proportional(found[0], mv));
    }
    CHECK_THROWS(mff_vector(Parameters::make(3, 2), 1));
    CHECK_THROWS(mff_vector(Parameters::make(4, 1), 0));
}

TEST_CASE("relaxed image of the MFF vector satisfies the relaxed relations") {
    for (long p : {2L, 3L, 4L}) {
        auto par = Parameters::make(p, 1);
        for (long r = 1; r <= p - 1; ++r) {
            CAPTURE(p);
            CAPTURE(r);
            PresentSpec ps;
            ps.kind = ModuleKind::GenVermaAffine;
            ps.params = par;
            ps.m = r;
            auto V = present_module(ps);
            EnvElement mff = mff_vector(par, r);
            ModuleVector v = act(V, mff, cyc_vec(V));
            REQUIRE(!v.zero());
            EnvElement f0;
            {
                PbwMonomial m;
                m.factors.push_back({V->alg().gen("F", qq(0)), static_cast<uint32_t>(p - r)});
                f0.terms[m] = 1;
            }
            ModuleVector img = act(V, f0, v);
            REQUIRE(!img.zero());
            auto H0 = EnvElement::generator(V->alg().gen("H", qq(0)));
            ModuleVector h = act(V, H0, img);
            for (std::size_t i = 0; i < img.coords.size(); ++i)
                CHECK(h.coords[i] == qq(r - 1) * img.coords[i]);
            for (auto& g : std::vector<std::pair<std::string, QQ>>{
                     {"E", qq(1)}, {"F", qq(1)}, {"H", qq(1)},
                     {"E", qq(2)}, {"F", qq(2)}, {"H", qq(2)}}) {
                auto X = EnvElement::generator(V->alg().gen(g.first, g.second));
                CHECK(act(V, X, img).zero());
            }
            auto found = find_singular(V, v.w);
            std::vector<std::vector<QQ>> span;
            for (auto& s : found) span.push_back(s.coords);
            CHECK(membership(span, v.coords).has_value());
        }
    }
}

TEST_CASE("charge bookkeeping of F0-descents") {
    auto par = Parameters::make(4, 1);
    PresentSpec ps;
    ps.kind = ModuleKind::GenVermaAffine;
    ps.params = par;
    ps.m = 3;
    auto V = present_module(ps);
    EnvElement f0 = EnvElement::generator(V->alg().gen("F", qq(0)));
    ModuleVector v = act(V, f0, cyc_vec(V));
    CHECK(v.w.charge == qq(0));  // (m-1) - 2
    auto H0 = EnvElement::generator(V->alg().gen("H", qq(0)));
    ModuleVector h = act(V, H0, v);
    CHECK(h.coords[0] == 0);
}

TEST_CASE("act errors: truncation and inhomogeneity") {
    PresentSpec ps;
    ps.kind = ModuleKind::VacuumNs2;
    ps.params = Parameters::make(3, 2);
    ps.trunc.max_level = qq(2);
    auto V = present_module(ps);
    auto L3 = EnvElement::generator(V->alg().gen("L", qq(-3)));
    CHECK_THROWS(act(V, L3, cyc_vec(V)));

    EnvElement mixed = EnvElement::generator(V->alg().gen("L", qq(-2)));
    mixed += EnvElement::generator(V->alg().gen("J", qq(-1)));
    CHECK_THROWS(act(V, mixed, cyc_vec(V)));
}

TEST_CASE("submodule characters") {
    auto V = vacuum(4, 1);
    Truncation tr;
    tr.max_level = qq(4);

    CHECK(submodule_character(V, {}, tr).dim.empty());

    auto full = submodule_character(V, {cyc_vec(V)}, tr);
    auto ch = module_character(V, tr);
    CHECK(full.dim == ch.dim);

    auto found = find_singular(V, {qq(3), qq(0)});
    REQUIRE(found.size() == 1);
    auto sub = submodule_character(V, {found[0]}, tr);
    CHECK(sub.dim.at(Weight{qq(3), qq(0)}) == 1);
    CHECK(sub.dim.count(Weight{qq(7, 2), qq(1)}) == 1);
}

TEST_CASE("simple characters: quotient by the unique singular vector") {
    auto V = gen_verma(4, 1, 1);
    Truncation tr;
    tr.max_level = qq(3);
    auto simple = simple_character(V, tr);
    const long full = V->dim({qq(3), qq(0)});
    CHECK(simple.dim.at(Weight{qq(3), qq(0)}) == full - 1);

    auto M = verma_ns2(3, 2, qq(7, 5), qq(3, 7));
    Truncation tr2;
    tr2.max_level = qq(2);
    auto s2 = simple_character(M, tr2);
    auto c2 = module_character(M, tr2);
    CHECK(s2.dim == c2.dim);

    auto cf = closed_form_character(ModuleKind::VermaNs2, M->spec().params, M->head_level(),
                                    M->head_charge(), tr2);
    for (auto& wd : s2.dim) {
        REQUIRE(cf.dim.count(wd.first));
        CHECK(wd.second <= cf.dim.at(wd.first));
    }
}

TEST_CASE("closed-form characters: displayed entries") {
    auto par = Parameters::make(3, 2);
    Truncation tr;
    tr.max_level = qq(2);
    auto ch = closed_form_character(ModuleKind::VermaNs2, par, qq(0), qq(0), tr);
    CHECK(ch.dim.at(Weight{qq(1, 2), qq(1)}) == 1);
    CHECK(ch.dim.at(Weight{qq(1, 2), qq(-1)}) == 1);
    CHECK(ch.dim.at(Weight{qq(1), qq(0)}) == 3);

    auto chc = closed_form_character(ModuleKind::ChiralVermaNs2, par, qq(1, 3), qq(2, 3), tr);
    CHECK(chc.dim.count(Weight{qq(1, 3) + qq(1, 2), qq(2, 3) + 1}) == 0);
    CHECK(chc.dim.at(Weight{qq(1, 3) + qq(1, 2), qq(2, 3) - 1}) == 1);

    CHECK_THROWS(closed_form_character(ModuleKind::GenVermaNs2, par, qq(0), qq(0), tr));
}

TEST_CASE("flow_character: identity, composition, and the mode-level pin") {
    auto par = Parameters::make(3, 2);
    const QQ c = par.c();
    Truncation tr;
    tr.max_level = qq(2);
    auto ch = closed_form_character(ModuleKind::VermaNs2, par, qq(1, 3), qq(2, 3), tr);

    auto idc = flow_character(ch, qq(0), c);
    CHECK(idc.dim == ch.dim);

    auto once = flow_character(flow_character(ch, qq(1), c), qq(1), c);
    auto twice = flow_character(ch, qq(2), c);
    CHECK(once.dim == twice.dim);

    auto V7 = gen_verma(3, 2, 7);
    const QQ h0 = V7->head_level(), j0 = V7->head_charge();
    CharacterSeries pt;
    pt.base_level = h0;
    pt.max_level = 0;
    pt.dim[Weight{h0, j0}] = 1;
    auto moved = flow_character(pt, qq(3), c);
    REQUIRE(moved.dim.size() == 1);
    const Weight img = moved.dim.begin()->first;
    auto U_L0 = spectral_flow_generator(V7->alg(), 6, V7->alg().gen("L", qq(0)));
    QQ expect_h = U_L0.scalar;
    for (auto& kc : U_L0.terms) {
        const std::string& f = V7->alg().families[kc.first.second].name;
        expect_h += kc.second * (f == "L" ? h0 : j0);
    }
    CHECK(img.level == expect_h);
    auto U_J0 = spectral_flow_generator(V7->alg(), 6, V7->alg().gen("J", qq(0)));
    QQ expect_j = U_J0.scalar;
    for (auto& kc : U_J0.terms) expect_j += kc.second * j0;
    CHECK(img.charge == expect_j);
}

TEST_CASE("determinism: two enumeration orders, identical results") {
    std::map<std::string, std::string> first_run;
    for (bool rev : {false, true}) {
        PresentSpec ps;
        ps.kind = ModuleKind::VacuumNs2;
        ps.params = Parameters::make(4, 1);
        ps.reversed_enum = rev;
        auto V = present_module(ps);
        auto found = find_singular(V, {qq(3), qq(0)});
        REQUIRE(found.size() == 1);
        ModuleElem el = V->from_coords(found[0]);
        std::map<std::string, std::string> table;
        for (auto& [m, c] : el.c) table[m.str(V->alg())] = qq_str(c);
        if (first_run.empty())
            first_run = table;
        else
            CHECK(first_run == table);
    }
}
