#include "n2/zhu.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace n2 {

namespace {

// Conformal weight of a homogeneous vacuum vector (head L0 = 0).
QQ vac_weight(const PresentationPtr& vac, const ModuleElem& A) {
    if (A.zero()) throw std::invalid_argument("zero field");
    QQ w = vac->weight_of(A.c.begin()->first).level;
    for (auto& [m, c] : A.c)
        if (vac->weight_of(m).level != w)
            throw std::invalid_argument("field is not L0-homogeneous");
    return w;
}

int vac_parity(const PresentationPtr& vac, const ModuleElem& A) {
    int p = vac->parity_of(vac->weight_of(A.c.begin()->first));
    for (auto& [m, c] : A.c)
        if (vac->parity_of(vac->weight_of(m)) != p)
            throw std::invalid_argument("field is not parity-homogeneous");
    return p;
}

int elem_parity(const PresentationPtr& pres, const ModuleElem& v) {
    int p = pres->parity_of(pres->weight_of(v.c.begin()->first));
    for (auto& [m, c] : v.c)
        if (pres->parity_of(pres->weight_of(m)) != p)
            throw std::invalid_argument("vector is not parity-homogeneous");
    return p;
}

// Single-generator field modes: L-field_(n) = L_{n-1}, J_(n) = J_n,
// G-field_(n) = G_{n-1/2}.
GeneratorMode table_mode(const AlgebraSpec& alg, uint8_t fam, long n) {
    const std::string& f = alg.families[fam].name;
    if (f == "L") return GeneratorMode{fam, static_cast<int>(2 * n - 2)};
    if (f == "J") return GeneratorMode{fam, static_cast<int>(2 * n)};
    return GeneratorMode{fam, static_cast<int>(2 * n - 1)};
}

// Is the monomial exactly a strong-generator vector (L_{-2}1, J_{-1}1,
// G+-_{-3/2}1)?
bool is_generator_vector(const AlgebraSpec& alg, const PbwMonomial& m) {
    if (m.factors.size() != 1 || m.factors.front().second != 1) return false;
    const GeneratorMode g = m.factors.front().first;
    const std::string& f = alg.fam(g).name;
    if (f == "L") return g.dmode == -4;
    if (f == "J") return g.dmode == -2;
    return g.dmode == -3;
}

// Mode engine: generator table plus the standard iterate (Borcherds)
// expansion for composite vectors, memoized per (A, n, v-monomial).
struct FieldModeEngine {
    PresentationPtr vac;
    PresentationPtr target;
    std::map<std::tuple<PbwMonomial, long, PbwMonomial>, ModuleElem> memo;

    ModuleElem apply(const PbwMonomial& A, long n, const ModuleElem& v) {
        ModuleElem out;
        for (auto& [mv, cv] : v.c) {
            ModuleElem t = apply_mono(A, n, mv);
            t *= cv;
            out += t;
        }
        return out;
    }

    ModuleElem apply_elem(const ModuleElem& A, long n, const ModuleElem& v) {
        ModuleElem out;
        for (auto& [ma, ca] : A.c) {
            ModuleElem t = apply(ma, n, v);
            t *= ca;
            out += t;
        }
        return out;
    }

    ModuleElem apply_mono(const PbwMonomial& A, long n, const PbwMonomial& mv) {
        const auto key = std::make_tuple(A, n, mv);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;

        ModuleElem out;
        ModuleElem v;
        v.c[mv] = 1;
        if (A.is_unit()) {
            if (n == -1) out = v;  // 1_(n) = d_{n,-1} id
        } else if (is_generator_vector(vac->alg(), A)) {
            const GeneratorMode g = A.factors.front().first;
            out = target->apply_mode(table_mode(target->alg(), g.fam, n), v);
        } else {
            // A = u_(k) B with u the leading letter.
            const GeneratorMode x = A.factors.front().first;
            PbwMonomial B = A;
            if (B.factors.front().second > 1)
                --B.factors.front().second;
            else
                B.factors.erase(B.factors.begin());
            const std::string& fx = vac->alg().fam(x).name;
            long k2;
            if (fx == "L")
                k2 = x.dmode + 2;
            else if (fx == "J")
                k2 = x.dmode;
            else
                k2 = x.dmode + 1;
            if (k2 % 2 != 0) throw std::runtime_error("odd iterate index");
            const long k = k2 / 2;
            const int pu = vac->alg().odd(x) ? 1 : 0;
            const int pB = B.parity(vac->alg());
            // sgn2 = -(-1)^{k + |u||B|}
            const bool k_odd = (k % 2 != 0);
            const bool m_odd = ((pu * pB) % 2 != 0);
            const QQ sgn2 = (k_odd == m_odd) ? qq(-1) : qq(1);

            const QQ lv = target->weight_of(mv).level;
            const QQ wB = B.level_drop(vac->alg());
            const QQ wu = -qq(x.dmode, 2);
            long i_hi = std::max(qq_floor_long(wB + lv) - n + 1, qq_floor_long(wu + lv) + 1);
            if (i_hi < 0) i_hi = 0;

            for (long i = 0; i <= i_hi; ++i) {
                const QQ b = qq_binom(qq(k), i) * ((i % 2 == 0) ? 1 : -1);
                if (b == 0) continue;
                // u_(k-i) (B_(n+i) v)
                ModuleElem t1 = apply_mono(B, n + i, mv);
                if (!t1.zero()) {
                    t1 = target->apply_mode(table_mode(target->alg(), x.fam, k - i), t1);
                    t1 *= b;
                    out += t1;
                }
                // -(-1)^{k+|u||B|} B_(k+n-i) (u_(i) v)
                ModuleElem t2 = target->apply_mode(table_mode(target->alg(), x.fam, i), v);
                if (!t2.zero()) {
                    t2 = apply(B, k + n - i, t2);
                    t2 *= b * sgn2;
                    out += t2;
                }
            }
        }
        memo.emplace(key, out);
        return out;
    }

    // Sum_{l>=0} binom(top, l) A_(l+off) v, truncated by the level bound.
    ModuleElem binomial_sum(const ModuleElem& A, const QQ& top, long off,
                            const ModuleElem& v) {
        ModuleElem out;
        if (A.zero() || v.zero()) return out;
        const QQ wA = vac_weight(vac, A);
        QQ lv(0);
        for (auto& [m, c] : v.c) lv = std::max(lv, target->weight_of(m).level);
        long l_hi = qq_floor_long(wA + lv) - off + 2;
        if (l_hi < 0) l_hi = 0;
        for (long l = 0; l <= l_hi; ++l) {
            const QQ b = qq_binom(top, l);
            if (b == 0) continue;
            ModuleElem t = apply_elem(A, l + off, v);
            t *= b;
            out += t;
        }
        return out;
    }

    ModuleElem star_left(Twist g, const ModuleElem& A, const ModuleElem& v) {
        const QQ wA = vac_weight(vac, A);
        const int i = vac_parity(vac, A);
        if (g == Twist::Id && i == 1) return ModuleElem{};
        return binomial_sum(A, wA, -1, v);
    }

    ModuleElem star_right(Twist g, const ModuleElem& v, const ModuleElem& A) {
        const QQ wA = vac_weight(vac, A);
        const int i = vac_parity(vac, A);
        if (g == Twist::Id && i == 1) return ModuleElem{};
        ModuleElem out = binomial_sum(A, wA - 1, -1, v);
        if (g == Twist::Sigma && i == 1 && elem_parity(target, v) == 1) out *= qq(-1);
        return out;
    }

    ModuleElem circle(Twist g, const ModuleElem& A, const ModuleElem& v) {
        const QQ wA = vac_weight(vac, A);
        const int i = vac_parity(vac, A);
        if (g == Twist::Sigma) return binomial_sum(A, wA, -2, v);
        return binomial_sum(A, wA - qq(i, 2), -2 + i, v);
    }
};

PresentationPtr make_vacuum(const Parameters& par) {
    PresentSpec ps;
    ps.kind = ModuleKind::VacuumNs2;
    ps.params = par;
    ps.trunc.max_level = qq(kDefaultDegreeCap);
    return present_module(ps);
}

}  // namespace

ModuleElem field_mode_apply(const PresentationPtr& vac, const PresentationPtr& target,
                            const ModuleElem& A, long n, const ModuleElem& v) {
    FieldModeEngine eng{vac, target, {}};
    return eng.apply_elem(A, n, v);
}

ModuleElem zhu_star_left(Twist g, const PresentationPtr& vac, const PresentationPtr& target,
                         const ModuleElem& A, const ModuleElem& v) {
    FieldModeEngine eng{vac, target, {}};
    return eng.star_left(g, A, v);
}

ModuleElem zhu_star_right(Twist g, const PresentationPtr& vac, const PresentationPtr& target,
                          const ModuleElem& v, const ModuleElem& A) {
    FieldModeEngine eng{vac, target, {}};
    return eng.star_right(g, v, A);
}

ModuleElem zhu_circle(Twist g, const PresentationPtr& vac, const PresentationPtr& target,
                      const ModuleElem& A, const ModuleElem& v) {
    FieldModeEngine eng{vac, target, {}};
    return eng.circle(g, A, v);
}

// ---- ZhuContext ----------------------------------------------------------------

int ZhuContext::column_of(const Weight& w, const PbwMonomial& m) const {
    auto it = colix_.find({w, m});
    if (it == colix_.end()) throw std::out_of_range("vector outside V_{<=Delta}");
    return it->second;
}

ModuleElem ZhuContext::gen_L() const {
    ModuleElem e;
    PbwMonomial m;
    m.factors.push_back({vac_->alg().gen("L", qq(-2)), 1});
    e.c[m] = 1;
    return e;
}
ModuleElem ZhuContext::gen_J() const {
    ModuleElem e;
    PbwMonomial m;
    m.factors.push_back({vac_->alg().gen("J", qq(-1)), 1});
    e.c[m] = 1;
    return e;
}
ModuleElem ZhuContext::gen_Gp() const {
    ModuleElem e;
    PbwMonomial m;
    m.factors.push_back({vac_->alg().gen("G+", qq(-3, 2)), 1});
    e.c[m] = 1;
    return e;
}
ModuleElem ZhuContext::gen_Gm() const {
    ModuleElem e;
    PbwMonomial m;
    m.factors.push_back({vac_->alg().gen("G-", qq(-3, 2)), 1});
    e.c[m] = 1;
    return e;
}
ModuleElem ZhuContext::unit() const {
    ModuleElem e;
    e.c[PbwMonomial{}] = 1;
    return e;
}

ZhuContextPtr ZhuContext::build(Twist g, const Parameters& params, const QQ& delta,
                                long initial_slack, long max_slack) {
    auto ctx = std::shared_ptr<ZhuContext>(new ZhuContext());
    ctx->g_ = g;
    ctx->params_ = params;
    ctx->delta_ = delta;
    ctx->vac_ = make_vacuum(params);
    const PresentationPtr vac = ctx->vac_;
    FieldModeEngine eng{vac, vac, {}};

    auto basis_upto = [&](const QQ& cutoff) {
        std::vector<std::pair<Weight, PbwMonomial>> out;
        const long dmax = qq_to_long(cutoff * 2);
        for (long dl = 0; dl <= dmax; ++dl)
            for (long q = -dl; q <= dl; ++q) {
                Weight w{qq(dl, 2), qq(q)};
                for (auto& m : vac->free_monomials(w)) out.push_back({w, m});
            }
        return out;
    };

    long slack = initial_slack;
    std::vector<long> dims_seen;
    while (true) {
        if (slack > max_slack)
            throw std::runtime_error("O-span stabilization not reached within slack bound");
        const QQ hi = delta + slack;
        auto all = basis_upto(hi);

        // Columns in descending level order: rref pivots then sit at the
        // highest level of each row, making the V_{<=X} cuts exact.
        std::vector<std::pair<Weight, PbwMonomial>> cols = all;
        std::stable_sort(cols.begin(), cols.end(), [](const auto& a, const auto& b) {
            if (!(a.first.level == b.first.level)) return b.first.level < a.first.level;
            if (!(a.first.charge == b.first.charge)) return a.first.charge < b.first.charge;
            return a.second < b.second;
        });
        std::map<std::pair<Weight, PbwMonomial>, int> colix;
        for (std::size_t i = 0; i < cols.size(); ++i) colix[cols[i]] = static_cast<int>(i);

        auto to_row = [&](const ModuleElem& v) {
            SparseRow r;
            for (auto& [m, c] : v.c) r[colix.at({vac->weight_of(m), m})] = c;
            return r;
        };

        SpanBuilder span(static_cast<int>(cols.size()));
        for (auto& [wa, ma] : all) {
            if (wa.level + 1 > hi) continue;
            ModuleElem A;
            A.c[ma] = 1;
            for (auto& [wb, mb] : all) {
                if (wa.level + wb.level + 1 > hi) continue;
                ModuleElem B;
                B.c[mb] = 1;
                ModuleElem prod = eng.circle(g, A, B);
                if (prod.zero()) continue;
                span.add(to_row(prod));
            }
        }

        std::vector<SparseRow> inter;
        for (auto& r : span.rows()) {
            const Weight& wp = cols[r.begin()->first].first;
            if (wp.level <= delta) inter.push_back(r);
        }

        dims_seen.push_back(static_cast<long>(inter.size()));
        const std::size_t n = dims_seen.size();
        if (n >= 2 && dims_seen[n - 1] == dims_seen[n - 2]) {
            ctx->slack_used_ = slack;
            ctx->stab_dims_ = dims_seen;
            for (auto& c : cols)
                if (c.first.level <= delta) ctx->cols_.push_back(c);
            for (std::size_t i = 0; i < ctx->cols_.size(); ++i)
                ctx->colix_[ctx->cols_[i]] = static_cast<int>(i);
            SpanBuilder red(static_cast<int>(ctx->cols_.size()));
            for (auto& r : inter) {
                SparseRow rr;
                for (auto& [cix, v] : r) rr[ctx->colix_.at(cols[cix])] = v;
                red.add(rr);
            }
            ctx->orows_ = red.rows();
            ctx->opivot_ = red.pivots();
            break;
        }
        ++slack;
    }

    // Certificate: filtered quotient dims must match the abstract algebra.
    for (long dl = 0; dl <= qq_to_long(delta * 2); ++dl) {
        const QQ x = qq(dl, 2);
        if (expected_quotient_dim(g, x) != ctx->quotient_dim(x))
            throw std::runtime_error(
                "O-span certificate failed at level " + qq_str(x) +
                ": computed " + std::to_string(ctx->quotient_dim(x)) + ", expected " +
                std::to_string(expected_quotient_dim(g, x)));
    }
    ctx->certified_ = true;
    return ctx;
}

long ZhuContext::quotient_dim(const QQ& x) const {
    long vdim = 0;
    for (auto& [w, m] : cols_)
        if (w.level <= x) ++vdim;
    long orank = 0;
    for (auto& r : orows_) {
        const Weight& wp = cols_[r.begin()->first].first;
        if (wp.level <= x) ++orank;
    }
    return vdim - orank;
}

long ZhuContext::expected_quotient_dim(Twist g, const QQ& x) {
    long count = 0;
    const long dx = qq_to_long(x * 2);
    for (long a = 0; 4 * a <= dx; ++a)
        for (long b = 0; 4 * a + 2 * b <= dx; ++b) {
            if (g == Twist::Id) {
                ++count;
                continue;
            }
            for (int e = 0; e <= 1; ++e)
                for (int f = 0; f <= 1; ++f)
                    if (4 * a + 2 * b + 3 * (e + f) <= dx) ++count;
        }
    return count;
}

ZhuCoset ZhuContext::reduce(const ModuleElem& v) const {
    SparseRow r;
    for (auto& [m, c] : v.c) {
        const Weight w = vac_->weight_of(m);
        if (w.level > delta_) throw std::invalid_argument("vector exceeds Delta cutoff");
        r[colix_.at({w, m})] = c;
    }
    while (true) {
        const SparseRow* prow = nullptr;
        QQ f;
        for (auto& [c, x] : r) {
            auto p = opivot_.find(c);
            if (p != opivot_.end()) {
                prow = &orows_[p->second];
                f = x;
                break;
            }
        }
        if (!prow) break;
        for (auto& [c, x] : *prow) {
            auto jt = r.find(c);
            if (jt == r.end()) {
                r[c] = -f * x;
            } else {
                jt->second -= f * x;
                if (jt->second == 0) r.erase(jt);
            }
        }
    }
    return ZhuCoset{std::move(r)};
}

ModuleElem ZhuContext::coset_representative(const ZhuCoset& c) const {
    ModuleElem v;
    for (auto& [cix, x] : c.reduced) v.c[cols_[cix].second] = x;
    return v;
}

ZhuCoset ZhuContext::star(const ZhuCoset& a, const ZhuCoset& b) const {
    ModuleElem va = coset_representative(a);
    ModuleElem vb = coset_representative(b);
    FieldModeEngine eng{vac_, vac_, {}};
    ModuleElem prod;
    std::map<Weight, ModuleElem> parts;
    for (auto& [m, c] : va.c) parts[vac_->weight_of(m)].c[m] = c;
    for (auto& [w, A] : parts) prod += eng.star_left(g_, A, vb);
    return reduce(prod);
}

// ---- polynomial solves -----------------------------------------------------

bool Gl11Element::proportional_to(const Gl11Element& o) const {
    if (p1.zero() != o.p1.zero() || p2.zero() != o.p2.zero()) return false;
    QQ s;
    if (!p1.zero())
        s = o.p1.t.begin()->second / p1.t.begin()->second;
    else if (!p2.zero())
        s = o.p2.t.begin()->second / p2.t.begin()->second;
    else
        return true;
    return (p1 * s == o.p1) && (p2 * s == o.p2);
}

namespace {

struct Gl11Monomial {
    long a, b;
    int e, f;
};

std::vector<Gl11Monomial> gl11_monomials(const QQ& delta) {
    std::vector<Gl11Monomial> out;
    const long dx = qq_to_long(delta * 2);
    for (long a = 0; 4 * a <= dx; ++a)
        for (long b = 0; 4 * a + 2 * b <= dx; ++b)
            for (int e = 0; e <= 1; ++e)
                for (int f = 0; f <= 1; ++f)
                    if (4 * a + 2 * b + 3 * (e + f) <= dx) out.push_back({a, b, e, f});
    return out;
}

std::vector<QQ> coset_as_vec(const ZhuContext& ctx, const ZhuCoset& c) {
    std::vector<QQ> v(ctx.columns().size(), QQ(0));
    for (auto& [cix, x] : c.reduced) v[cix] = x;
    return v;
}

}  // namespace

Gl11Element coset_to_gl11(const ZhuContextPtr& ctx, const ZhuCoset& coset) {
    if (ctx->twist() != Twist::Sigma)
        throw std::invalid_argument("gl(1|1) normal form needs the sigma twist");
    const QQ c = ctx->params().c();

    ModuleElem zvec = ctx->gen_L();
    zvec.add(PbwMonomial{}, -c / 24);

    auto monos = gl11_monomials(ctx->delta());
    std::vector<std::vector<QQ>> images;
    for (auto& mo : monos) {
        ZhuCoset acc = ctx->reduce(ctx->unit());
        for (long i = 0; i < mo.a; ++i) acc = ctx->star(ctx->reduce(zvec), acc);
        for (long i = 0; i < mo.b; ++i) acc = ctx->star(acc, ctx->reduce(ctx->gen_J()));
        if (mo.e) acc = ctx->star(acc, ctx->reduce(ctx->gen_Gm()));
        if (mo.f) acc = ctx->star(acc, ctx->reduce(ctx->gen_Gp()));
        images.push_back(coset_as_vec(*ctx, acc));
    }
    auto sol = membership(images, coset_as_vec(*ctx, coset));
    if (!sol)
        throw std::runtime_error(
            "coset_to_gl11 solve failed: O-span did not stabilize correctly");

    Gl11Element out;
    for (std::size_t i = 0; i < monos.size(); ++i) {
        if ((*sol)[i] == 0) continue;
        const auto& mo = monos[i];
        Poly::Exp e{static_cast<int>(mo.a), static_cast<int>(mo.b), 0, 0};
        if (mo.e == 0 && mo.f == 0)
            out.p1.add(e, (*sol)[i]);
        else if (mo.e == 1 && mo.f == 1)
            out.p2.add(e, (*sol)[i]);
        else
            throw std::runtime_error("even coset acquired odd gl(1|1) components");
    }
    return out;
}

Poly coset_to_poly(const ZhuContextPtr& ctx, const ZhuCoset& coset) {
    if (ctx->twist() != Twist::Id)
        throw std::invalid_argument("polynomial normal form needs the id twist");
    const long dx = qq_to_long(ctx->delta() * 2);

    std::vector<std::pair<long, long>> monos;
    for (long a = 0; 4 * a <= dx; ++a)
        for (long b = 0; 4 * a + 2 * b <= dx; ++b) monos.push_back({a, b});

    std::vector<std::vector<QQ>> images;
    for (auto& [a, b] : monos) {
        ZhuCoset acc = ctx->reduce(ctx->unit());
        for (long i = 0; i < a; ++i) acc = ctx->star(ctx->reduce(ctx->gen_L()), acc);
        for (long i = 0; i < b; ++i) acc = ctx->star(acc, ctx->reduce(ctx->gen_J()));
        images.push_back(coset_as_vec(*ctx, acc));
    }
    auto sol = membership(images, coset_as_vec(*ctx, coset));
    if (!sol)
        throw std::runtime_error(
            "coset_to_poly solve failed: O-span did not stabilize correctly");
    Poly out;
    for (std::size_t i = 0; i < monos.size(); ++i)
        if ((*sol)[i] != 0)
            out.add(Poly::Exp{static_cast<int>(monos[i].first),
                              static_cast<int>(monos[i].second), 0, 0},
                    (*sol)[i]);
    return out;
}

Gl11Action gl11_action(const Gl11Element& phi, const QQ& z, const QQ& j) {
    const std::array<QQ, 4> top{z, j, 0, 0};
    const std::array<QQ, 4> low{z, j - 1, 0, 0};
    Gl11Action act;
    act.on_highest = phi.p1.eval(top);
    act.on_lower = phi.p1.eval(low) + 2 * z * phi.p2.eval(low);
    act.zero_on_simple =
        z == 0 ? act.on_highest == 0 : (act.on_highest == 0 && act.on_lower == 0);
    return act;
}

}  // namespace n2
