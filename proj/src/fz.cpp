#include "n2/fz.hpp"

#include <deque>
#include <sstream>
#include <stdexcept>

namespace n2 {

bool FZElement::proportional_to(const FZElement& o) const {
    if (f.zero() != o.f.zero() || g.zero() != o.g.zero()) return false;
    QQ s;
    if (!f.zero())
        s = o.f.t.begin()->second / f.t.begin()->second;
    else if (!g.zero())
        s = o.g.t.begin()->second / g.t.begin()->second;
    else
        return true;
    return (f * s == o.f) && (g * s == o.g);
}

FZContextPtr FZContext::make(const Parameters& params, const QQ& j) {
    auto ctx = FZContextPtr(new FZContext());
    ctx->params_ = params;
    ctx->j_ = j;
    PresentSpec ps;
    ps.kind = ModuleKind::ChiralVermaNs2;
    ps.params = params;
    ps.j = j;
    ps.trunc.max_level = qq(kDefaultDegreeCap);
    ctx->chiral_ = present_module(ps);
    PresentSpec vs;
    vs.kind = ModuleKind::VacuumNs2;
    vs.params = params;
    vs.trunc.max_level = qq(kDefaultDegreeCap);
    ctx->vac_ = present_module(vs);
    return ctx;
}

namespace {

// Rewrite rules from the O_id spanning set of the chiral bimodule:
//   L_{-m} w = -2 L_{-m+1} w - L_{-m+2} w   (m >= 3)
//   J_{-m} w = -J_{-m+1} w                  (m >= 2)
//   G_{-m-1/2} w = -G_{-m+1/2} w            (m >= 1)
bool rewritable(const AlgebraSpec& alg, GeneratorMode g) {
    const std::string& f = alg.fam(g).name;
    if (f == "L") return g.dmode <= -6;
    if (f == "J") return g.dmode <= -4;
    return g.dmode <= -3;  // G+-
}

}  // namespace

ModuleElem FZContext::rewrite(const ModuleElem& v) const {
    // Only HEAD rewrites are valid modulo O: the spanning elements are
    // (combo) w for module vectors w, and O is not a submodule. An inner
    // rewritable letter is first commuted to the front by exact operator
    // identities; evaluation back into the chiral basis can resurface deep
    // modes, which re-enter the loop (the level strictly drops at each head
    // rewrite, so this terminates).
    const AlgebraSpec& alg = chiral_->alg();
    using Word = std::vector<GeneratorMode>;
    std::map<Word, QQ> work;
    auto push = [&](Word&& w, const QQ& c) {
        if (c == 0) return;
        auto [it, fresh] = work.emplace(std::move(w), c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) work.erase(it);
        }
    };
    for (auto& [m, c] : v.c) {
        Word w;
        for (auto& [g, e] : m.factors)
            for (uint32_t i = 0; i < e; ++i) w.push_back(g);
        push(std::move(w), c);
    }

    ModuleElem out;
    long guard = 0;
    while (!work.empty()) {
        if (++guard > 2000000) throw std::runtime_error("bimodule rewrite guard tripped");
        auto node = work.extract(work.begin());
        const Word w = node.key();
        const QQ coeff = node.mapped();
        if (coeff == 0) continue;

        std::size_t pos = w.size();
        for (std::size_t i = 0; i < w.size(); ++i)
            if (rewritable(alg, w[i])) {
                pos = i;
                break;
            }

        if (pos == w.size()) {
            // no rewritable letters: evaluate; resurfaced deep modes re-enter
            ModuleElem e = chiral_->cyclic();
            for (auto it = w.rbegin(); it != w.rend() && !e.zero(); ++it)
                e = chiral_->apply_mode(*it, e);
            for (auto& [m, cm] : e.c) {
                bool clean = true;
                for (auto& [g, ex] : m.factors)
                    if (rewritable(alg, g)) {
                        clean = false;
                        break;
                    }
                if (clean) {
                    out.add(m, coeff * cm);
                } else {
                    Word nw;
                    for (auto& [g, ex] : m.factors)
                        for (uint32_t i = 0; i < ex; ++i) nw.push_back(g);
                    push(std::move(nw), coeff * cm);
                }
            }
            continue;
        }

        if (pos == 0) {
            // head rewrite: x w' == -2 x' w' - x'' w'  (L family), or
            // -x' w' (J and G families), modulo O
            const GeneratorMode x = w.front();
            const std::string& f = alg.fam(x).name;
            Word rest(w.begin() + 1, w.end());
            auto with_head = [&](int dshift) {
                Word nw;
                nw.reserve(w.size());
                nw.push_back(GeneratorMode{x.fam, x.dmode + dshift});
                nw.insert(nw.end(), rest.begin(), rest.end());
                return nw;
            };
            if (f == "L") {
                push(with_head(2), coeff * qq(-2));
                push(with_head(4), coeff * qq(-1));
            } else {
                push(with_head(2), coeff * qq(-1));
            }
            continue;
        }

        // commute the rewritable letter one step toward the front:
        // a b = (-1)^{|a||b|} b a + [a, b]
        const GeneratorMode a = w[pos - 1], b = w[pos];
        const QQ sign = (alg.odd(a) && alg.odd(b)) ? qq(-1) : qq(1);
        {
            Word nw = w;
            std::swap(nw[pos - 1], nw[pos]);
            push(std::move(nw), coeff * sign);
        }
        LinComb br = bracket(alg, a, b);
        for (auto& [key, cval] : br.terms) {
            Word nw;
            nw.reserve(w.size() - 1);
            nw.insert(nw.end(), w.begin(), w.begin() + pos - 1);
            nw.push_back(GeneratorMode{key.second, key.first});
            nw.insert(nw.end(), w.begin() + pos + 1, w.end());
            push(std::move(nw), coeff * cval);
        }
        if (br.scalar != 0) {
            Word nw;
            nw.insert(nw.end(), w.begin(), w.begin() + pos - 1);
            nw.insert(nw.end(), w.begin() + pos + 1, w.end());
            push(std::move(nw), coeff * br.scalar);
        }
    }
    return out;
}

ModuleElem FZContext::left_h(const ModuleElem& v) const {
    ModuleElem L;
    PbwMonomial m;
    m.factors.push_back({vac_->alg().gen("L", qq(-2)), 1});
    L.c[m] = 1;
    return zhu_star_left(Twist::Id, vac_, chiral_, L, v);
}
ModuleElem FZContext::right_h(const ModuleElem& v) const {
    ModuleElem L;
    PbwMonomial m;
    m.factors.push_back({vac_->alg().gen("L", qq(-2)), 1});
    L.c[m] = 1;
    return zhu_star_right(Twist::Id, vac_, chiral_, v, L);
}
ModuleElem FZContext::right_q(const ModuleElem& v) const {
    ModuleElem J;
    PbwMonomial m;
    m.factors.push_back({vac_->alg().gen("J", qq(-1)), 1});
    J.c[m] = 1;
    return zhu_star_right(Twist::Id, vac_, chiral_, v, J);
}

FZElement FZContext::reduce(const ModuleElem& v) const {
    ModuleElem target = rewrite(v);

    // Monomial images x_l^al x_r^be y^ga (psi^eps), rewritten, then an exact
    // solve. The naive degree bound is doubled against level because
    // x_l - x_r drops one level.
    QQ lv(0);
    for (auto& [m, c] : v.c) lv = std::max(lv, chiral_->weight_of(m).level);
    const long D0 = 2 * qq_floor_long(lv) + 2;

    for (long slack = 0; slack <= 6; slack += 2) {
        const long D = D0 + slack;
        struct Mono {
            long al, be, ga;
            int eps;
        };
        std::vector<Mono> monos;
        for (long al = 0; 2 * al <= D; ++al)
            for (long be = 0; 2 * al + 2 * be <= D; ++be)
                for (long ga = 0; 2 * al + 2 * be + ga <= D; ++ga)
                    for (int eps = 0; eps <= 1; ++eps) monos.push_back({al, be, ga, eps});

        // column registry over residual monomials
        std::map<PbwMonomial, int> colix;
        auto to_vec = [&](const ModuleElem& e, std::vector<SparseRow>& rows) {
            SparseRow r;
            for (auto& [m, c] : e.c) {
                auto [it, fresh] = colix.emplace(m, static_cast<int>(colix.size()));
                r[it->second] = c;
            }
            rows.push_back(std::move(r));
        };

        std::vector<SparseRow> img_rows;
        ModuleElem psi;
        {
            PbwMonomial pm;
            pm.factors.push_back({chiral_->alg().gen("G-", qq(-1, 2)), 1});
            psi.c[pm] = 1;
        }
        for (auto& mo : monos) {
            ModuleElem e = mo.eps ? psi : chiral_->cyclic();
            for (long i = 0; i < mo.ga; ++i) e = rewrite(right_q(e));
            for (long i = 0; i < mo.be; ++i) e = rewrite(right_h(e));
            for (long i = 0; i < mo.al; ++i) e = rewrite(left_h(e));
            to_vec(e, img_rows);
        }
        std::vector<SparseRow> tgt_rows;
        to_vec(target, tgt_rows);

        const int ncols = static_cast<int>(colix.size());
        auto densify = [&](const SparseRow& r) {
            std::vector<QQ> d(ncols, QQ(0));
            for (auto& [c, x] : r) d[c] = x;
            return d;
        };
        std::vector<std::vector<QQ>> span;
        for (auto& r : img_rows) span.push_back(densify(r));
        auto sol = membership(span, densify(tgt_rows[0]));
        if (!sol) continue;  // enlarge the monomial set

        // uniqueness: monomial images must be independent
        RationalMatrix M(static_cast<int>(span.size()), ncols);
        for (std::size_t i = 0; i < span.size(); ++i)
            for (int c = 0; c < ncols; ++c)
                if (span[i][c] != 0) M.row[i][c] = span[i][c];
        if (rref(M).rank != static_cast<int>(span.size()))
            throw std::runtime_error("bimodule monomial images are dependent");

        FZElement out;
        for (std::size_t i = 0; i < monos.size(); ++i) {
            if ((*sol)[i] == 0) continue;
            const auto& mo = monos[i];
            Poly::Exp e{static_cast<int>(mo.al), static_cast<int>(mo.be),
                        static_cast<int>(mo.ga), 0};
            if (mo.eps == 0)
                out.f.add(e, (*sol)[i]);
            else
                out.g.add(e, (*sol)[i]);
        }
        return out;
    }
    throw std::runtime_error("fz_reduce solve failed within the degree slack bound");
}

FZKernel fz_kernel_generators() {
    const Poly xl = Poly::var(0), xr = Poly::var(1), y = Poly::var(2);
    const Poly P = xl - xr;
    const Poly Q = xl + xr + Poly::constant(qq(1, 3));
    const Poly R = y + Poly::constant(qq(1, 3));
    const Poly one = Poly::constant(1);

    FZKernel k;
    k.f[0] = P * (P + R) * QQ(3) - Q;
    k.f[1] = (P * 2 + R) * (P - R);
    k.f[2] = (P * 2 + R) * ((P * 3 - Poly::constant(4)) * (P - R) - Q * 3 + Poly::constant(2));
    k.g[0] = P * 2 + R * 2 - one;
    k.g[1] = Q - P - R;
    k.g[2] = P * P * 4 + P * (one - R * 2) - R * R * 2 + R * 2 - Q * 3;
    return k;
}

std::pair<QQ, QQ> fusion_right_eigenvalues(const Parameters& params, const FusionRight& r) {
    const QQ a = params.a();
    if (r.kind == FusionRight::Kind::Jline) {
        // Lowest weight of the typical simple at (r,s) = (1,1): the charge q
        // fixes the affine weight jj via q = 2a jj.
        const QQ jj = r.j / (2 * a);
        const QQ h = sugawara_delta(params, weight_jmn(params, 1, 1)) - a * jj * jj;
        return {h, r.j};
    }
    if (r.eps == 0) {
        const QQ jm = weight_jmn(params, 1, 0);
        return {a * jm, 2 * a * jm};
    }
    if (r.eps == 1) {
        const QQ jm = weight_jmn(params, 2, 0);
        return {a * jm, 2 * a * jm};
    }
    // eps = -1: lowest weight of the theta = 1 flow of the simple quotient of
    // the m = 2 generalized Verma module.
    PresentSpec ps;
    ps.kind = ModuleKind::GenVermaNs2;
    ps.params = params;
    ps.m = 2;
    ps.trunc.max_level = qq(3);
    auto pres = present_module(ps);
    Truncation tr;
    tr.max_level = qq(2);
    CharacterSeries ch = simple_character(pres, tr);
    CharacterSeries fl = flow_character(ch, qq(1), params.c());
    // The flowed level h' = h + q + c/6 is bounded below on the whole module
    // by the free cost q^2/2: states beyond the scan cannot undercut it.
    bool first = true;
    Weight best{0, 0};
    for (auto& [w, d] : fl.dim) {
        if (first || w.level < best.level) {
            best = w;
            first = false;
        }
    }
    if (first) throw std::runtime_error("empty flowed character");
    return {best.level, best.charge};
}

namespace {

std::string right_name(long eps, const QQ& j, bool is_eps, bool flip) {
    std::ostringstream os;
    if (flip) os << "Pi ";
    if (is_eps)
        os << "C(" << eps << ")";
    else
        os << "C_{" << qq_str(j) << "}";
    return os.str();
}

}  // namespace

FusionReport fz_kernel_and_fusion(const Parameters& params, const FusionRight& right,
                                  const Poly& f_c, const Poly& g_c) {
    if (params.p != 3 || params.pp != 2)
        throw std::invalid_argument("the bimodule quotient is computed for (p,p') = (3,2)");
    auto [hr, qr] = fusion_right_eigenvalues(params, right);

    // Right module must be a module of C[h,q]/(f_c, g_c).
    const std::array<QQ, 4> pt{hr, qr, 0, 0};
    if (f_c.eval(pt) != 0 || g_c.eval(pt) != 0)
        throw std::invalid_argument("right eigenvalues are not a module of the quotient");

    // Specialize x_r = hr, y = qr; variables: only x_l (index 0) remains.
    FZKernel ker = fz_kernel_generators();
    const std::array<Poly, 4> sub{Poly::var(0), Poly::constant(hr), Poly::constant(qr),
                                  Poly::constant(0)};
    auto specialize = [&](const Poly& p) { return to_dense_univariate(p.subst(sub), 0); };

    auto gcd3 = [&](const std::array<Poly, 3>& ps) {
        std::vector<QQ> gacc = specialize(ps[0]);
        gacc = poly_gcd(gacc, specialize(ps[1]));
        gacc = poly_gcd(gacc, specialize(ps[2]));
        return gacc;
    };
    const std::vector<QQ> geven = gcd3(ker.f);
    const std::vector<QQ> godd = gcd3(ker.g);

    FusionReport rep;
    const int base_parity = right.parity_flip ? 1 : 0;
    auto classify = [&](const std::vector<QQ>& gpoly, int parity, const QQ& ql) {
        if (gpoly.empty())
            throw std::runtime_error("specialized kernel vanished identically");
        RootReport roots = rational_roots(gpoly);
        rep.unfactored_degree += roots.unfactored_degree;
        for (auto& [xl, mult] : roots.roots) {
            FusionSummand s;
            s.xl = xl;
            s.ql = ql;
            s.parity = parity;
            s.multiplicity = mult;
            // identify against the known simple list
            s.name = "?";
            for (long eps : {-1L, 0L, 1L}) {
                FusionRight cand;
                cand.kind = FusionRight::Kind::Eps;
                cand.eps = eps;
                auto [h2, q2] = fusion_right_eigenvalues(params, cand);
                if (h2 == xl && q2 == ql) s.name = right_name(eps, 0, true, parity == 1);
            }
            if (s.name == "?") {
                // the j-line: h = Delta(j_{1,1}) - q^2/(4a)
                FusionRight cand;
                cand.kind = FusionRight::Kind::Jline;
                cand.j = ql;
                auto [h2, q2] = fusion_right_eigenvalues(params, cand);
                if (h2 == xl && q2 == ql) s.name = right_name(0, ql, false, parity == 1);
            }
            rep.summands.push_back(s);
            rep.dimension += mult;
        }
    };
    // even part of the bimodule: left q acts by y + j = qr + 2/3
    classify(geven, base_parity, qr + qq(2, 3));
    // odd part: left q acts by y + j - 1 = qr - 1/3
    classify(godd, 1 - base_parity, qr - qq(1, 3));
    return rep;
}

}  // namespace n2
