#include "n2/modules.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "n2/cache.hpp"

namespace n2 {

std::string kind_name(ModuleKind k) {
    switch (k) {
        case ModuleKind::VermaNs2: return "verma-ns2";
        case ModuleKind::ChiralVermaNs2: return "chiral-verma-ns2";
        case ModuleKind::VacuumNs2: return "vacuum-ns2";
        case ModuleKind::GenVermaNs2: return "gen-verma-ns2";
        case ModuleKind::VermaAffine: return "verma-affine";
        case ModuleKind::GenVermaAffine: return "gen-verma-affine";
        case ModuleKind::VacuumAffine: return "vacuum-affine";
        case ModuleKind::RelaxedVermaAffine: return "relaxed-verma-affine";
        case ModuleKind::Gl11Verma: return "gl11-verma";
    }
    return "?";
}

std::optional<ModuleKind> kind_from_name(const std::string& s) {
    for (ModuleKind k :
         {ModuleKind::VermaNs2, ModuleKind::ChiralVermaNs2, ModuleKind::VacuumNs2,
          ModuleKind::GenVermaNs2, ModuleKind::VermaAffine, ModuleKind::GenVermaAffine,
          ModuleKind::VacuumAffine, ModuleKind::RelaxedVermaAffine, ModuleKind::Gl11Verma})
        if (kind_name(k) == s) return k;
    return std::nullopt;
}

namespace {

bool is_ns2_kind(ModuleKind k) {
    switch (k) {
        case ModuleKind::VermaNs2:
        case ModuleKind::ChiralVermaNs2:
        case ModuleKind::VacuumNs2:
        case ModuleKind::GenVermaNs2: return true;
        default: return false;
    }
}

bool is_affine_kind(ModuleKind k) {
    switch (k) {
        case ModuleKind::VermaAffine:
        case ModuleKind::GenVermaAffine:
        case ModuleKind::VacuumAffine:
        case ModuleKind::RelaxedVermaAffine: return true;
        default: return false;
    }
}

thread_local int g_apply_depth = 0;
constexpr int kMaxApplyDepth = 20000;

struct DepthGuard {
    DepthGuard() {
        if (++g_apply_depth > kMaxApplyDepth)
            throw std::runtime_error("module action recursion exceeded guard depth");
    }
    ~DepthGuard() { --g_apply_depth; }
};

PbwMonomial tail_of(const PbwMonomial& m) {
    PbwMonomial rest = m;
    if (rest.factors.front().second > 1)
        --rest.factors.front().second;
    else
        rest.factors.erase(rest.factors.begin());
    return rest;
}

}  // namespace

PresentationPtr ModulePresentation::make(const PresentSpec& spec) {
    auto p = PresentationPtr(new ModulePresentation());
    p->spec_ = spec;
    p->init();
    return p;
}

PresentationPtr present_module(const PresentSpec& spec) { return ModulePresentation::make(spec); }

void ModulePresentation::init() {
    const ModuleKind k = spec_.kind;
    if (is_ns2_kind(k))
        alg_ = build_algebra(AlgebraId::Ns2, spec_.params);
    else if (is_affine_kind(k))
        alg_ = build_algebra(AlgebraId::AffineSl2, spec_.params);
    else
        alg_ = build_algebra(AlgebraId::Gl11, spec_.params);

    const Parameters& par = spec_.params;
    switch (k) {
        case ModuleKind::VermaNs2:
            h0_ = spec_.h;
            j0_ = spec_.j;
            break;
        case ModuleKind::ChiralVermaNs2:
            j0_ = spec_.j;
            h0_ = spec_.j / 2;
            if (spec_.h != 0 && spec_.h != h0_)
                throw std::invalid_argument("chiral Verma requires L0 = j/2");
            break;
        case ModuleKind::VacuumNs2:
            h0_ = 0;
            j0_ = 0;
            break;
        case ModuleKind::GenVermaNs2: {
            if (spec_.m < 1) throw std::invalid_argument("gen-verma requires m >= 1");
            const QQ jm = weight_jmn(par, spec_.m, 0);
            h0_ = par.a() * jm;
            j0_ = 2 * par.a() * jm;
            break;
        }
        case ModuleKind::VermaAffine:
            j0_ = 2 * spec_.j;
            h0_ = sugawara_delta(par, spec_.j);
            break;
        case ModuleKind::GenVermaAffine:
        case ModuleKind::VacuumAffine: {
            if (k == ModuleKind::VacuumAffine) spec_.m = 1;
            if (spec_.m < 1) throw std::invalid_argument("gen-verma requires m >= 1");
            j0_ = qq(spec_.m - 1);
            h0_ = sugawara_delta(par, qq(spec_.m - 1, 2));
            break;
        }
        case ModuleKind::RelaxedVermaAffine: {
            h0_ = spec_.h;
            j0_ = 2 * spec_.j;
            // Zero-mode Casimir H0^2/2 + E0F0 + F0E0 acts by 2(k+2)h.
            casimir_ = 2 * (par.k() + 2) * spec_.h;
            break;
        }
        case ModuleKind::Gl11Verma:
            h0_ = 0;
            j0_ = spec_.j;
            break;
    }

    auto gen1 = [&](const std::string& f, const QQ& mode) {
        return EnvElement::generator(alg_->gen(f, mode));
    };
    switch (k) {
        case ModuleKind::ChiralVermaNs2:
            stated_.push_back(gen1("G+", qq(-1, 2)));
            break;
        case ModuleKind::VacuumNs2:
            stated_.push_back(gen1("G+", qq(-1, 2)));
            stated_.push_back(gen1("G-", qq(-1, 2)));
            break;
        case ModuleKind::GenVermaNs2: {
            stated_.push_back(gen1("G+", qq(-1, 2)));
            PbwMonomial prod;
            for (long t = spec_.m; t >= 1; --t)
                prod.factors.push_back({alg_->gen("G-", qq(-(2 * t - 1), 2)), 1});
            EnvElement e;
            e.terms[prod] = 1;
            stated_.push_back(e);
            // The product relation is not singular for m >= 2; its module
            // closure is materialized for the weight-space quotient. (m = 1
            // is the vacuum relation G-(-1/2)|1>.)
            ModuleElem me;
            me.c[prod] = 1;
            extra_rel_.push_back({weight_of(prod), me});
            break;
        }
        case ModuleKind::VermaAffine:
            stated_.push_back(gen1("E", qq(0)));
            break;
        case ModuleKind::GenVermaAffine:
        case ModuleKind::VacuumAffine: {
            stated_.push_back(gen1("E", qq(0)));
            PbwMonomial f0m;
            f0m.factors.push_back({alg_->gen("F", qq(0)), static_cast<uint32_t>(spec_.m)});
            EnvElement e;
            e.terms[f0m] = 1;
            stated_.push_back(e);
            break;
        }
        default: break;
    }
}

PresentationPtr ModulePresentation::with_extra_relation(const ModuleElem& rel) const {
    auto p = PresentationPtr(new ModulePresentation());
    p->spec_ = spec_;
    p->init();
    p->extra_rel_.assign(extra_rel_.begin(), extra_rel_.end());
    if (!rel.zero()) {
        Weight w = weight_of(rel.c.begin()->first);
        p->extra_rel_.push_back({w, rel});
    }
    return p;
}

Weight ModulePresentation::weight_of(const PbwMonomial& m) const {
    return Weight{m.level_drop(*alg_), j0_ + m.charge(*alg_)};
}

int ModulePresentation::parity_of(const Weight& w) const {
    if (is_affine_kind(spec_.kind)) return 0;
    QQ q = w.charge - j0_;
    long n = qq_to_long(q);
    return static_cast<int>(((n % 2) + 2) % 2);
}

ModuleElem ModulePresentation::cyclic() const {
    ModuleElem e;
    e.c[PbwMonomial{}] = 1;
    return e;
}

bool ModulePresentation::basis_factor(GeneratorMode g) const {
    const FamilyInfo& f = alg_->fam(g);
    const ModuleKind k = spec_.kind;
    switch (k) {
        case ModuleKind::VermaNs2:
            return g.dmode < 0;
        case ModuleKind::ChiralVermaNs2:
        case ModuleKind::GenVermaNs2:
            if (f.name == "G+" && g.dmode == -1) return false;
            return g.dmode < 0;
        case ModuleKind::VacuumNs2:
            if (f.name == "L" && g.dmode == -2) return false;
            if ((f.name == "G+" || f.name == "G-") && g.dmode == -1) return false;
            return g.dmode < 0;
        case ModuleKind::VermaAffine:
        case ModuleKind::GenVermaAffine:
        case ModuleKind::VacuumAffine:
            if (g.dmode < 0) return true;
            return g.dmode == 0 && f.name == "F";
        case ModuleKind::RelaxedVermaAffine:
            if (g.dmode < 0) return true;
            return g.dmode == 0 && (f.name == "F" || f.name == "E");
        case ModuleKind::Gl11Verma:
            return f.name == "Psi-";
    }
    return false;
}

ModuleElem ModulePresentation::apply_to_cyclic(GeneratorMode x) const {
    ModuleElem out;
    const FamilyInfo& f = alg_->fam(x);
    const ModuleKind k = spec_.kind;

    if (x.dmode > 0) return out;  // positive modes annihilate

    if (x.dmode == 0) {
        if (is_ns2_kind(k)) {
            const QQ ev = f.name == "L" ? h0_ : j0_;
            if (ev != 0) out.c[PbwMonomial{}] = ev;
            return out;
        }
        if (k == ModuleKind::Gl11Verma) {
            if (f.name == "Z") {
                if (spec_.z != 0) out.c[PbwMonomial{}] = spec_.z;
            } else if (f.name == "J") {
                if (j0_ != 0) out.c[PbwMonomial{}] = j0_;
            } else if (f.name == "Psi-") {
                PbwMonomial m;
                m.factors.push_back({x, 1});
                out.c[m] = 1;
            }
            return out;  // Psi+ annihilates
        }
        if (f.name == "H") {
            if (j0_ != 0) out.c[PbwMonomial{}] = j0_;
            return out;
        }
        if (f.name == "E") {
            if (k == ModuleKind::RelaxedVermaAffine) {
                PbwMonomial m;
                m.factors.push_back({x, 1});
                out.c[m] = 1;
            }
            return out;  // highest-weight kinds: E0 annihilates
        }
        // F0
        if ((k == ModuleKind::GenVermaAffine || k == ModuleKind::VacuumAffine) && spec_.m <= 1)
            return out;  // F0 |1> = 0
        PbwMonomial m;
        m.factors.push_back({x, 1});
        out.c[m] = 1;
        return out;
    }

    if (!basis_factor(x)) return out;  // structural nulls at the cyclic vector
    PbwMonomial m;
    m.factors.push_back({x, 1});
    out.c[m] = 1;
    return out;
}

ModuleElem ModulePresentation::apply_mode_mono(GeneratorMode x, const PbwMonomial& m) const {
    const ModeKey key{{x.fam, x.dmode}, m};
    {
        std::shared_lock lk(mtx_);
        auto it = mono_cache_.find(key);
        if (it != mono_cache_.end()) return it->second;
    }
    DepthGuard guard;

    ModuleElem out;
    const ModuleKind k = spec_.kind;
    if (m.is_unit()) {
        out = apply_to_cyclic(x);
    } else {
        const GeneratorMode g = m.factors.front().first;
        const FamilyInfo& fx = alg_->fam(x);
        const FamilyInfo& fg = alg_->fam(g);

        // Relaxed zero-mode normal form: never mix F0 and E0 in a monomial.
        const bool relaxed_mix = k == ModuleKind::RelaxedVermaAffine && x.dmode == 0 &&
                                 g.dmode == 0 && fx.name != fg.name;
        const bool insert_ok = !relaxed_mix && basis_factor(x) &&
                               (alg_->pbw_less(x, g) || (x == g && !alg_->odd(x)));

        if (insert_ok) {
            PbwMonomial nm = m;
            if (nm.factors.front().first == x)
                ++nm.factors.front().second;
            else
                nm.factors.insert(nm.factors.begin(), {x, 1});
            const bool f0_capped =
                (k == ModuleKind::GenVermaAffine || k == ModuleKind::VacuumAffine) &&
                fx.name == "F" && x.dmode == 0 &&
                static_cast<long>(nm.factors.front().second) > spec_.m - 1;
            if (!f0_capped) out.c[nm] = 1;  // F0^{>=m} |m> = 0 otherwise
        } else if (x == g && alg_->odd(x)) {
            // odd square: x x = (1/2){x,x}
            LinComb br = bracket(*alg_, x, x);
            PbwMonomial rest = tail_of(m);
            for (auto& [bk, bc] : br.terms) {
                ModuleElem t = apply_mode_mono(GeneratorMode{bk.second, bk.first}, rest);
                t *= bc / 2;
                out += t;
            }
            if (br.scalar != 0) {
                ModuleElem t;
                t.c[rest] = br.scalar / 2;
                out += t;
            }
        } else if (relaxed_mix && m.factors.size() == 1) {
            // Pure zero block of the opposite type: one Casimir reduction.
            // FE = (Om - H^2/2 - H)/2, EF = (Om - H^2/2 + H)/2 on a state of
            // H0-eigenvalue mu.
            const long b = m.factors.front().second;
            PbwMonomial rest = tail_of(m);
            QQ mu, scalar;
            if (fx.name == "F") {
                mu = j0_ + 2 * (b - 1);
                scalar = (casimir_ - mu * mu / 2 - mu) / 2;
            } else {
                mu = j0_ - 2 * (b - 1);
                scalar = (casimir_ - mu * mu / 2 + mu) / 2;
            }
            if (scalar != 0) {
                ModuleElem t;
                t.c[rest] = scalar;
                out += t;
            }
        } else {
            // Commute x past the head: x g = (-1)^{|x||g|} g x + [x, g].
            PbwMonomial rest = tail_of(m);
            const QQ sign = (alg_->odd(x) && alg_->odd(g)) ? qq(-1) : qq(1);
            ModuleElem t1 = apply_mode_mono(x, rest);
            for (auto& [mm, cc] : t1.c) {
                ModuleElem t = apply_mode_mono(g, mm);
                t *= sign * cc;
                out += t;
            }
            LinComb br = bracket(*alg_, x, g);
            for (auto& [bk, bc] : br.terms) {
                ModuleElem t = apply_mode_mono(GeneratorMode{bk.second, bk.first}, rest);
                t *= bc;
                out += t;
            }
            if (br.scalar != 0) {
                ModuleElem t;
                t.c[rest] = br.scalar;
                out += t;
            }
        }
    }

    std::unique_lock lk(mtx_);
    mono_cache_.emplace(key, out);
    return out;
}

ModuleElem ModulePresentation::apply_mode(GeneratorMode x, const ModuleElem& v) const {
    ModuleElem out;
    for (auto& [m, c] : v.c) {
        ModuleElem t = apply_mode_mono(x, m);
        t *= c;
        out += t;
    }
    return out;
}

ModuleElem ModulePresentation::apply_env(const EnvElement& u, const ModuleElem& v) const {
    ModuleElem out;
    for (auto& [mu, cu] : u.terms) {
        std::vector<GeneratorMode> word;
        for (auto& [g, e] : mu.factors)
            for (uint32_t i = 0; i < e; ++i) word.push_back(g);
        ModuleElem cur = v;
        for (auto it = word.rbegin(); it != word.rend() && !cur.zero(); ++it)
            cur = apply_mode(*it, cur);
        cur *= cu;
        out += cur;
    }
    return out;
}

// --- free-basis enumeration --------------------------------------------------

std::vector<PbwMonomial> ModulePresentation::free_monomials(const Weight& w) const {
    const QQ lvl = w.level;
    const QQ qrel = w.charge - j0_;
    std::vector<PbwMonomial> out;
    if (lvl < 0) return out;
    if (!is_integer(lvl * 2)) return out;
    const long dlevel = qq_to_long(lvl * 2);

    const ModuleKind k = spec_.kind;
    if (k == ModuleKind::Gl11Verma) {
        if (dlevel != 0) return out;
        if (qrel == 0) out.push_back(PbwMonomial{});
        if (qrel == -1) {
            PbwMonomial m;
            m.factors.push_back({alg_->gen("Psi-", qq(0)), 1});
            out.push_back(m);
        }
        return out;
    }
    if (!is_integer(qrel)) return out;
    const long q = qq_to_long(qrel);

    struct Slot {
        GeneratorMode g;
        long dcost;  // doubled level
        long charge;
        bool odd;
    };
    std::vector<Slot> slots;
    for (std::size_t fi = 0; fi < alg_->families.size(); ++fi) {
        const FamilyInfo& f = alg_->families[fi];
        if (f.zero_only) continue;
        const int d0 = f.half_modes ? -1 : -2;
        for (int dm = d0; dm >= -dlevel; dm -= 2) {
            GeneratorMode g{static_cast<uint8_t>(fi), dm};
            if (!basis_factor(g)) continue;
            slots.push_back({g, static_cast<long>(-dm), qq_to_long(f.charge), f.odd});
        }
    }
    std::sort(slots.begin(), slots.end(),
              [&](const Slot& a, const Slot& b) { return alg_->pbw_less(a.g, b.g); });

    // Zero-mode tail carrying the residual charge (affine kinds only).
    auto zero_tail = [&](long dq) -> std::optional<PbwMonomial> {
        if (dq == 0) return PbwMonomial{};
        if (!is_affine_kind(k)) return std::nullopt;
        if (dq % 2 != 0) return std::nullopt;
        if (dq < 0) {
            const long a = -dq / 2;
            if ((k == ModuleKind::GenVermaAffine || k == ModuleKind::VacuumAffine) &&
                a > spec_.m - 1)
                return std::nullopt;
            PbwMonomial t;
            t.factors.push_back({alg_->gen("F", qq(0)), static_cast<uint32_t>(a)});
            return t;
        }
        if (k != ModuleKind::RelaxedVermaAffine) return std::nullopt;
        PbwMonomial t;
        t.factors.push_back({alg_->gen("E", qq(0)), static_cast<uint32_t>(dq / 2)});
        return t;
    };

    PbwMonomial acc;
    std::function<void(std::size_t, long, long)> rec = [&](std::size_t i, long dl, long need) {
        if (i == slots.size()) {
            if (dl != 0) return;
            auto tail = zero_tail(need);
            if (!tail) return;
            PbwMonomial m = acc;
            if (!tail->factors.empty()) m.factors.push_back(tail->factors.front());
            out.push_back(std::move(m));
            return;
        }
        const Slot& s = slots[i];
        rec(i + 1, dl, need);  // exponent 0
        if (s.dcost <= 0) return;
        const long maxe = s.odd ? 1 : dl / s.dcost;
        if (maxe < 1) return;
        acc.factors.push_back({s.g, 1});
        for (long e = 1; e <= maxe; ++e) {
            acc.factors.back().second = static_cast<uint32_t>(e);
            rec(i + 1, dl - e * s.dcost, need - e * s.charge);
        }
        acc.factors.pop_back();
    };
    rec(0, dlevel, q);

    std::sort(out.begin(), out.end());
    if (spec_.reversed_enum) std::reverse(out.begin(), out.end());
    return out;
}

long ModulePresentation::free_dim(const Weight& w) const {
    return static_cast<long>(free_monomials(w).size());
}

// --- relation closure --------------------------------------------------------

void ModulePresentation::ensure_closure(const QQ& level_cap) const {
    if (extra_rel_.empty()) return;
    {
        std::shared_lock lk(mtx_);
        if (closure_cap_ >= level_cap) return;
    }
    std::lock_guard build_lk(closure_build_mtx_);
    {
        std::shared_lock lk(mtx_);
        if (closure_cap_ >= level_cap) return;
    }

    QQ cap = level_cap;
    for (auto& [w, e] : extra_rel_) cap = std::max(cap, w.level);

    // Generous charge window: PBW paths excurse at most ~2*levels plus a
    // zero-mode zigzag margin.
    QQ qwin = 2 * cap + 8;
    for (auto& [w, e] : extra_rel_) {
        QQ qr = w.charge - j0_;
        if (qr < 0) qr = -qr;
        qwin = std::max(qwin, QQ(qr + 2 * cap + 8));
    }
    if (spec_.trunc.charge_window) {
        QQ j0abs = j0_ < 0 ? -j0_ : j0_;
        qwin = std::max(qwin, QQ(*spec_.trunc.charge_window + j0abs + 8));
    }

    struct WInfo {
        SpanBuilder span{0};
        std::map<PbwMonomial, int> index;
        std::vector<PbwMonomial> mono;
    };
    std::map<Weight, WInfo> at;

    auto to_row = [&](WInfo& wi, const ModuleElem& v) {
        SparseRow r;
        for (auto& [m, c] : v.c) {
            auto it = wi.index.find(m);
            int id;
            if (it == wi.index.end()) {
                id = static_cast<int>(wi.index.size());
                wi.index.emplace(m, id);
                wi.mono.push_back(m);
            } else {
                id = it->second;
            }
            r[id] = c;
        }
        return r;
    };
    auto from_row = [&](WInfo& wi, const SparseRow& r) {
        ModuleElem v;
        for (auto& [cix, c] : r) v.c[wi.mono[cix]] = c;
        return v;
    };

    std::deque<std::pair<Weight, ModuleElem>> queue;
    auto offer = [&](const ModuleElem& v) {
        if (v.zero()) return;
        Weight w = weight_of(v.c.begin()->first);
        if (w.level > cap || w.level < 0) return;
        QQ qr = w.charge - j0_;
        if (qr < 0) qr = -qr;
        if (qr > qwin) return;
        WInfo& wi = at[w];
        SparseRow rem = wi.span.reduce(to_row(wi, v));
        if (rem.empty()) return;
        wi.span.add(rem);
        queue.push_back({w, from_row(wi, rem)});
    };

    for (auto& [w, e] : extra_rel_) offer(e);

    const long dcap = qq_to_long(cap * 2);
    while (!queue.empty()) {
        auto [w, v] = queue.front();
        queue.pop_front();
        const long dl = qq_to_long(w.level * 2);
        for (std::size_t fi = 0; fi < alg_->families.size(); ++fi) {
            const FamilyInfo& f = alg_->families[fi];
            if (f.zero_only) {
                if (f.name == "Z" || f.name == "J") continue;  // scalars on gl11
                offer(apply_mode(GeneratorMode{static_cast<uint8_t>(fi), 0}, v));
                continue;
            }
            const int lo = static_cast<int>(-(dcap - dl));  // keeps new level <= cap
            const int hi = static_cast<int>(dl);            // keeps new level >= 0
            for (int dm = lo; dm <= hi; ++dm) {
                if (f.half_modes != (dm % 2 != 0)) continue;
                if (dm == 0) {
                    // Cartans act by scalars on homogeneous vectors; only the
                    // affine ladder zero modes can enlarge the span.
                    if (f.name != "E" && f.name != "F") continue;
                }
                offer(apply_mode(GeneratorMode{static_cast<uint8_t>(fi), dm}, v));
            }
        }
    }

    std::map<Weight, std::vector<ModuleElem>> result;
    for (auto& [w, wi] : at) {
        std::vector<ModuleElem> vs;
        for (auto& r : wi.span.rows()) vs.push_back(from_row(wi, r));
        if (!vs.empty()) result[w] = std::move(vs);
    }
    std::unique_lock lk(mtx_);
    closure_ = std::move(result);
    closure_cap_ = cap;
    ws_cache_.clear();  // weight spaces may now see more relations
}

// --- weight spaces -----------------------------------------------------------

namespace {

std::string mono_key(const PbwMonomial& m) {
    if (m.factors.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (auto& [g, e] : m.factors) {
        if (!first) os << ",";
        first = false;
        os << int(g.fam) << "." << g.dmode << "." << e;
    }
    return os.str();
}

PbwMonomial mono_parse(const std::string& s) {
    PbwMonomial m;
    if (s == "1") return m;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        int fam, dm;
        unsigned long e;
        if (sscanf(tok.c_str(), "%d.%d.%lu", &fam, &dm, &e) != 3)
            throw std::runtime_error("bad monomial token");
        m.factors.push_back({GeneratorMode{static_cast<uint8_t>(fam), dm},
                             static_cast<uint32_t>(e)});
    }
    return m;
}

std::string elem_key(const ModuleElem& v) {
    std::ostringstream os;
    bool first = true;
    for (auto& [m, c] : v.c) {
        if (!first) os << "+";
        first = false;
        os << qq_str(c) << "*" << mono_key(m);
    }
    return os.str();
}

std::string ws_serialize(const WeightSpaceBasis& ws) {
    std::ostringstream os;
    bool first = true;
    for (auto& m : ws.spanning) {
        if (!first) os << ";";
        first = false;
        os << mono_key(m);
    }
    os << "\n";
    first = true;
    for (int c : ws.basis_cols) {
        if (!first) os << ",";
        first = false;
        os << c;
    }
    os << "\n";
    for (auto& row : ws.rel_rows) {
        bool f2 = true;
        for (auto& [c, v] : row) {
            if (!f2) os << ",";
            f2 = false;
            os << c << ":" << qq_str(v);
        }
        os << "\n";
    }
    return os.str();
}

bool ws_parse(const std::string& payload, WeightSpaceBasis& ws) {
    std::istringstream is(payload);
    std::string line;
    if (!std::getline(is, line)) return false;
    if (!line.empty()) {
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ';')) ws.spanning.push_back(mono_parse(tok));
    }
    if (!std::getline(is, line)) return false;
    if (!line.empty()) {
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) ws.basis_cols.push_back(std::stoi(tok));
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        SparseRow row;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) {
            auto pos = tok.find(':');
            if (pos == std::string::npos) return false;
            row[std::stoi(tok.substr(0, pos))] = parse_qq(tok.substr(pos + 1));
        }
        ws.rel_rows.push_back(std::move(row));
    }
    for (std::size_t r = 0; r < ws.rel_rows.size(); ++r)
        ws.rel_pivots[ws.rel_rows[r].begin()->first] = static_cast<int>(r);
    ws.dim = static_cast<int>(ws.basis_cols.size());
    return true;
}

}  // namespace

WeightSpacePtr ModulePresentation::weight_space(const Weight& w) const {
    if (w.level < 0) throw std::invalid_argument("negative level");
    if (spec_.kind == ModuleKind::RelaxedVermaAffine && !spec_.trunc.charge_window)
        throw std::invalid_argument("relaxed kinds require an active charge window");
    {
        std::shared_lock lk(mtx_);
        auto it = ws_cache_.find(w);
        if (it != ws_cache_.end()) return it->second;
    }

    // Disk cache: keyed by the full semantic content of the presentation.
    std::string dkey;
    auto cache = global_cache();
    if (cache) {
        std::ostringstream ks;
        ks << "ws|" << kEngineVersion << "|" << kind_name(spec_.kind) << "|" << spec_.params.p
           << "/" << spec_.params.pp << "|" << qq_str(spec_.h) << "|" << qq_str(spec_.j) << "|"
           << qq_str(spec_.z) << "|" << spec_.m << "|" << spec_.reversed_enum << "|";
        if (spec_.trunc.charge_window) ks << qq_str(*spec_.trunc.charge_window);
        ks << "|";
        for (auto& [rw, re] : extra_rel_) ks << elem_key(re) << "&";
        ks << "|" << qq_str(w.level) << "@" << qq_str(w.charge);
        dkey = ks.str();
        if (auto hit = cache->get(dkey)) {
            auto ws = std::make_shared<WeightSpaceBasis>();
            ws->w = w;
            if (ws_parse(*hit, *ws)) {
                std::unique_lock lk(mtx_);
                auto [it, fresh] = ws_cache_.emplace(w, ws);
                return it->second;
            }
        }
    }

    ensure_closure(w.level);
    {
        std::shared_lock lk(mtx_);
        auto it = ws_cache_.find(w);
        if (it != ws_cache_.end()) return it->second;
    }

    auto ws = std::make_shared<WeightSpaceBasis>();
    ws->w = w;
    ws->spanning = free_monomials(w);

    std::map<PbwMonomial, int> col;
    for (std::size_t i = 0; i < ws->spanning.size(); ++i)
        col[ws->spanning[i]] = static_cast<int>(i);

    RationalMatrix rel(0, static_cast<int>(ws->spanning.size()));
    {
        std::shared_lock lk(mtx_);
        auto it = closure_.find(w);
        if (it != closure_.end()) {
            for (auto& v : it->second) {
                SparseRow r;
                for (auto& [m, c] : v.c) {
                    auto jt = col.find(m);
                    if (jt == col.end())
                        throw std::runtime_error("closure vector outside free span");
                    r[jt->second] = c;
                }
                rel.row.push_back(std::move(r));
                ++rel.rows;
            }
        }
    }
    RrefResult rr = rref(rel);
    for (int r = 0; r < rr.rank; ++r) ws->rel_rows.push_back(rr.reduced.row[r]);
    for (int r = 0; r < rr.rank; ++r) ws->rel_pivots[rr.pivot_cols[r]] = r;
    for (int c = 0; c < static_cast<int>(ws->spanning.size()); ++c)
        if (!ws->rel_pivots.count(c)) ws->basis_cols.push_back(c);
    ws->dim = static_cast<int>(ws->basis_cols.size());

    if (cache) cache->put(dkey, ws_serialize(*ws));

    std::unique_lock lk(mtx_);
    auto [it, fresh] = ws_cache_.emplace(w, ws);
    return it->second;
}

ModuleElem ModulePresentation::reduce(const ModuleElem& v) const {
    if (v.zero()) return v;
    Weight w = weight_of(v.c.begin()->first);
    for (auto& [m, c] : v.c)
        if (!(weight_of(m) == w)) throw std::invalid_argument("reduce: inhomogeneous element");
    auto ws = weight_space(w);
    std::map<PbwMonomial, int> col;
    for (std::size_t i = 0; i < ws->spanning.size(); ++i)
        col[ws->spanning[i]] = static_cast<int>(i);
    SparseRow r;
    for (auto& [m, c] : v.c) r[col.at(m)] = c;
    for (auto& [pc, rowix] : ws->rel_pivots) {
        auto it = r.find(pc);
        if (it == r.end()) continue;
        const QQ f = it->second;
        for (auto& [c2, x] : ws->rel_rows[rowix]) {
            auto jt = r.find(c2);
            if (jt == r.end()) {
                r[c2] = -f * x;
            } else {
                jt->second -= f * x;
                if (jt->second == 0) r.erase(jt);
            }
        }
    }
    ModuleElem out;
    for (auto& [cix, c] : r) out.c[ws->spanning[cix]] = c;
    return out;
}

ModuleVector ModulePresentation::to_coords(const ModuleElem& v) const {
    ModuleVector mv;
    mv.pres = std::const_pointer_cast<ModulePresentation>(shared_from_this());
    if (v.zero()) {
        mv.w = Weight{0, j0_};
        return mv;
    }
    Weight w = weight_of(v.c.begin()->first);
    ModuleElem red = reduce(v);
    auto ws = weight_space(w);
    std::map<PbwMonomial, int> col;
    for (std::size_t i = 0; i < ws->spanning.size(); ++i)
        col[ws->spanning[i]] = static_cast<int>(i);
    mv.w = w;
    mv.coords.assign(ws->dim, QQ(0));
    std::map<int, int> basis_pos;
    for (std::size_t i = 0; i < ws->basis_cols.size(); ++i)
        basis_pos[ws->basis_cols[i]] = static_cast<int>(i);
    for (auto& [m, c] : red.c) {
        auto it = basis_pos.find(col.at(m));
        if (it == basis_pos.end())
            throw std::runtime_error("reduced element has relation-pivot support");
        mv.coords[it->second] = c;
    }
    return mv;
}

ModuleElem ModulePresentation::from_coords(const ModuleVector& v) const {
    auto ws = weight_space(v.w);
    if (static_cast<int>(v.coords.size()) != ws->dim)
        throw std::invalid_argument("coordinate length mismatch");
    ModuleElem out;
    for (int i = 0; i < ws->dim; ++i)
        if (v.coords[i] != 0) out.c[ws->spanning[ws->basis_cols[i]]] = v.coords[i];
    return out;
}

// --- operations --------------------------------------------------------------

ModuleVector act(const PresentationPtr& pres, const EnvElement& e, const ModuleVector& v) {
    if (e.zero()) {
        ModuleVector out;
        out.pres = pres;
        out.w = v.w;
        out.coords.assign(v.coords.size(), QQ(0));
        return out;
    }
    const AlgebraSpec& alg = pres->alg();
    const QQ dl = e.terms.begin()->first.level_drop(alg);
    const QQ dq = e.terms.begin()->first.charge(alg);
    for (auto& [m, c] : e.terms)
        if (m.level_drop(alg) != dl || m.charge(alg) != dq)
            throw std::invalid_argument("act requires a weight-homogeneous element");
    const Weight target{v.w.level + dl, v.w.charge + dq};
    if (target.level > pres->trunc().max_level)
        throw std::runtime_error("act: result exceeds configured truncation");
    ModuleElem out = pres->apply_env(e, pres->from_coords(v));
    if (target.level < 0) {
        if (!out.zero()) throw std::runtime_error("nonzero element below level 0");
        ModuleVector z;
        z.pres = pres;
        z.w = Weight{0, pres->head_charge()};
        z.coords.assign(pres->weight_space(z.w)->dim, QQ(0));
        return z;
    }
    ModuleElem red = pres->reduce(out);
    ModuleVector mv;
    mv.pres = pres;
    mv.w = target;
    mv.coords.assign(pres->weight_space(target)->dim, QQ(0));
    if (!red.zero()) mv = pres->to_coords(red);
    return mv;
}

std::vector<GeneratorMode> positive_tests(const ModulePresentation& pres) {
    const AlgebraSpec& a = pres.alg();
    switch (pres.kind()) {
        case ModuleKind::VermaNs2:
        case ModuleKind::ChiralVermaNs2:
        case ModuleKind::VacuumNs2:
        case ModuleKind::GenVermaNs2:
            return {a.gen("L", qq(1)), a.gen("J", qq(1)), a.gen("G+", qq(1, 2)),
                    a.gen("G-", qq(1, 2))};
        case ModuleKind::VermaAffine:
        case ModuleKind::GenVermaAffine:
        case ModuleKind::VacuumAffine:
            return {a.gen("E", qq(0)), a.gen("F", qq(1)), a.gen("E", qq(1))};
        case ModuleKind::RelaxedVermaAffine:
            return {a.gen("E", qq(1)), a.gen("F", qq(1)), a.gen("H", qq(1))};
        case ModuleKind::Gl11Verma:
            return {a.gen("Psi+", qq(0))};
    }
    return {};
}

std::vector<ModuleVector> find_singular(const PresentationPtr& pres, const Weight& w) {
    auto ws = pres->weight_space(w);
    if (ws->dim == 0) return {};
    const AlgebraSpec& alg = pres->alg();

    std::vector<SparseRow> rows;
    for (GeneratorMode x : positive_tests(*pres)) {
        const Weight tgt{w.level - x.mode(), w.charge + alg.charge(x)};
        if (tgt.level < 0) continue;
        auto wst = pres->weight_space(tgt);
        if (wst->dim == 0) continue;
        std::vector<std::vector<QQ>> cols(ws->dim);
        for (int j = 0; j < ws->dim; ++j) {
            ModuleVector bj;
            bj.pres = pres;
            bj.w = w;
            bj.coords.assign(ws->dim, QQ(0));
            bj.coords[j] = 1;
            ModuleElem red = pres->reduce(pres->apply_mode(x, pres->from_coords(bj)));
            cols[j].assign(wst->dim, QQ(0));
            if (!red.zero()) {
                ModuleVector iv = pres->to_coords(red);
                for (int t = 0; t < wst->dim; ++t) cols[j][t] = iv.coords[t];
            }
        }
        for (int t = 0; t < wst->dim; ++t) {
            SparseRow r;
            for (int j = 0; j < ws->dim; ++j)
                if (cols[j][t] != 0) r[j] = cols[j][t];
            rows.push_back(std::move(r));
        }
    }

    RationalMatrix m(static_cast<int>(rows.size()), ws->dim);
    for (std::size_t r = 0; r < rows.size(); ++r) m.row[r] = rows[r];
    auto basis = nullspace(m);

    std::vector<ModuleVector> out;
    for (auto& v : basis) {
        ModuleVector mv;
        mv.pres = pres;
        mv.w = w;
        mv.coords = v;
        ModuleElem el = pres->from_coords(mv);
        if (el.zero()) continue;
        // Leading PBW-ordered (canonical) coordinate normalized to 1.
        const QQ lead = el.c.begin()->second;
        if (lead != 1)
            for (auto& x : mv.coords) x /= lead;
        out.push_back(std::move(mv));
    }
    return out;
}

EnvElement mff_vector(const Parameters& params, long r) {
    if (params.pp != 1)
        throw std::invalid_argument("MFF closed form requires p' = 1; use find_singular");
    if (r < 1 || r > params.p - 1)
        throw std::invalid_argument("MFF vector requires 1 <= r <= p-1");
    auto alg = build_algebra(AlgebraId::AffineSl2, params);
    PbwMonomial m;
    m.factors.push_back({alg->gen("E", qq(-1)), static_cast<uint32_t>(params.p - r)});
    EnvElement e;
    e.terms[m] = 1;
    return e;
}

}  // namespace n2
