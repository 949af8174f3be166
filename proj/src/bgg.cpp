#include "n2/bgg.hpp"

#include <future>
#include <sstream>
#include <stdexcept>

namespace n2 {

std::string variant_name(ResolutionVariant v) {
    switch (v) {
        case ResolutionVariant::AffineVerma: return "affine-verma";
        case ResolutionVariant::AffineParabolic: return "affine-parabolic";
        case ResolutionVariant::N2Chiral: return "n2-chiral";
        case ResolutionVariant::N2Parabolic: return "n2-parabolic";
        case ResolutionVariant::N2Relaxed: return "n2-relaxed";
    }
    return "?";
}

std::optional<ResolutionVariant> variant_from_name(const std::string& s) {
    for (ResolutionVariant v :
         {ResolutionVariant::AffineVerma, ResolutionVariant::AffineParabolic,
          ResolutionVariant::N2Chiral, ResolutionVariant::N2Parabolic,
          ResolutionVariant::N2Relaxed})
        if (variant_name(v) == s) return v;
    return std::nullopt;
}

namespace {

void validate_spec(const ResolutionSpec& sp) {
    const Parameters& par = sp.params;
    switch (sp.variant) {
        case ResolutionVariant::AffineVerma:
        case ResolutionVariant::N2Chiral:
            if (!in_ikw(par, sp.r, sp.s))
                throw std::invalid_argument("(r, s) outside the admissible index set");
            break;
        case ResolutionVariant::AffineParabolic:
        case ResolutionVariant::N2Parabolic:
            if (sp.s != 0 || !in_ikw(par, sp.r, 0))
                throw std::invalid_argument("parabolic variants require (r, 0) admissible");
            break;
        case ResolutionVariant::N2Relaxed: {
            if (!in_ibpz(par, sp.r, sp.s))
                throw std::invalid_argument("(r, s) outside the BPZ index set");
            const QQ d1 = sp.j - weight_jmn(par, sp.r, sp.s);
            const QQ d2 = sp.j - weight_jmn(par, par.p - sp.r, par.pp - sp.s);
            if (is_integer(d1) || is_integer(d2))
                throw std::invalid_argument("relaxed variant needs j off the atypical lattice");
            break;
        }
    }
}

// Module number and flow twist of chain index idx (0 = head).
//   even idx = 2m:   module 2pm + r, twist pm
//   odd  idx = 2m-1: module 2pm - r, twist pm - r
std::pair<long, long> chain_data(const Parameters& par, long r, long idx) {
    if (idx % 2 == 0) {
        const long m = idx / 2;
        return {2 * par.p * m + r, par.p * m};
    }
    const long m = (idx + 1) / 2;
    return {2 * par.p * m - r, par.p * m - r};
}

BggSummand make_summand(const ResolutionSpec& sp, long idx, const Truncation& trunc) {
    const Parameters& par = sp.params;
    auto [M, tw] = chain_data(par, sp.r, idx);
    PresentSpec ps;
    ps.params = par;
    ps.trunc = trunc;
    ps.trunc.max_level = qq(kDefaultDegreeCap);  // terms scanned past the box
    QQ theta(0);
    std::ostringstream label;
    switch (sp.variant) {
        case ResolutionVariant::AffineVerma:
            ps.kind = ModuleKind::VermaAffine;
            ps.j = weight_jmn(par, M, sp.s);
            label << "M(" << M << "," << sp.s << ")";
            break;
        case ResolutionVariant::AffineParabolic:
            if (M < 1) throw std::invalid_argument("parabolic chain left the domain");
            ps.kind = ModuleKind::GenVermaAffine;
            ps.m = M;
            label << "V(" << M << ")";
            break;
        case ResolutionVariant::N2Chiral:
            ps.kind = ModuleKind::ChiralVermaNs2;
            ps.j = 2 * par.a() * weight_jmn(par, M, sp.s);
            theta = tw;
            label << "M+(" << M << "," << sp.s << ")^" << tw;
            break;
        case ResolutionVariant::N2Parabolic:
            if (M < 1) throw std::invalid_argument("parabolic chain left the domain");
            ps.kind = ModuleKind::GenVermaNs2;
            ps.m = M;
            theta = tw;
            label << "V(" << M << ")^" << tw;
            break;
        case ResolutionVariant::N2Relaxed:
            ps.kind = ModuleKind::VermaNs2;
            ps.h = sugawara_delta(par, weight_jmn(par, M, sp.s)) - par.a() * sp.j * sp.j;
            ps.j = 2 * par.a() * sp.j;
            theta = tw;
            label << "M(" << M << "," << sp.s << ";j)^" << tw;
            break;
    }
    return BggSummand{present_module(ps), theta, label.str()};
}

bool two_sided(ResolutionVariant v) {
    return v == ResolutionVariant::AffineVerma || v == ResolutionVariant::N2Chiral ||
           v == ResolutionVariant::N2Relaxed;
}

}  // namespace

std::vector<BggTerm> bgg_complex(const ResolutionSpec& spec, int depth) {
    validate_spec(spec);
    if (depth < 0) throw std::invalid_argument("bgg_complex needs an explicit depth");
    Truncation tr;  // presentation-level truncation is the degree cap
    std::vector<BggTerm> out;
    for (int n = 0; n <= depth; ++n) {
        BggTerm term;
        term.n = n;
        if (n == 0) {
            term.summands.push_back(make_summand(spec, 0, tr));
        } else {
            term.summands.push_back(make_summand(spec, n, tr));
            if (two_sided(spec.variant)) term.summands.push_back(make_summand(spec, -n, tr));
        }
        out.push_back(std::move(term));
    }
    return out;
}

namespace {

// Free lower bound for the level of a charge-q_rel weight space.
QQ level_cost(const ModulePresentation& pres, long q) {
    switch (pres.kind()) {
        case ModuleKind::VermaNs2:
            return qq(q * q, 2);
        case ModuleKind::ChiralVermaNs2:
        case ModuleKind::GenVermaNs2:
        case ModuleKind::VacuumNs2:
            if (q > 0) return qq(q * (q + 2), 2);  // G+ starts at -3/2
            return qq(q * q, 2);
        case ModuleKind::VermaAffine:
            if (q > 0) return qq(q, 2);  // E_{-n} raises by 2 per level
            return qq(0);                // F0 tail is free
        case ModuleKind::GenVermaAffine:
        case ModuleKind::VacuumAffine: {
            if (q > 0) return qq(q, 2);
            const long cap = 2 * (pres.spec().m - 1);
            if (-q <= cap) return qq(0);
            return qq(-q - cap, 2);
        }
        case ModuleKind::RelaxedVermaAffine:
            return qq(0);
        case ModuleKind::Gl11Verma:
            return qq(0);
    }
    return qq(0);
}

struct BoxSpec {
    QQ head_level;
    QQ max_level;                     // N
    std::optional<QQ> charge_window;  // absolute |charge| bound
};

// Integer local minimizer of the convex map q -> cost(q) + th q on the
// charge lattice (step 1 for ns2, 2 for affine), clamped to [qlo, qhi].
long lattice_argmin(const ModulePresentation& pres, const QQ& th, long cstep, long qlo,
                    long qhi) {
    auto val = [&](long q) { return level_cost(pres, q) + th * q; };
    long q0 = qq_floor_long(-th);
    q0 -= ((q0 % cstep) + cstep) % cstep;  // align down to the lattice
    q0 = std::max(qlo, std::min(qhi, q0));
    while (q0 - cstep >= qlo && val(q0 - cstep) < val(q0)) q0 -= cstep;
    while (q0 + cstep <= qhi && val(q0 + cstep) < val(q0)) q0 += cstep;
    return q0;
}

// Exact lower bound of (h' - head) over the summand's states inside the
// charge window (free-module bound; valid for quotients).
QQ summand_lower_bound(const BggSummand& s, const BoxSpec& box, const QQ& c) {
    const QQ h0 = s.pres->head_level();
    const QQ j0 = s.pres->head_charge();
    const QQ th = s.theta;
    const QQ cst = h0 + th * j0 + th * th * c / 6 - box.head_level;
    const bool ns2 = s.pres->alg().id == AlgebraId::Ns2;
    const long cstep = ns2 ? 1 : 2;
    long qlo = -(1L << 30), qhi = 1L << 30;
    if (box.charge_window) {
        // |j0 + q + th c/3| <= M
        const QQ M = *box.charge_window;
        const QQ base = j0 + th * c / 3;
        qlo = qq_floor_long(-M - base);
        qhi = qq_floor_long(M - base) + 1;
    }
    if (qlo > qhi) return cst + 1000000;  // window excludes everything
    const long q0 = lattice_argmin(*s.pres, th, cstep, qlo, qhi);
    return cst + level_cost(*s.pres, q0) + th * q0;
}

// All (weight, dim) contributions of a flowed summand inside the box.
std::map<Weight, long> summand_contribution(const BggSummand& s, const BoxSpec& box,
                                            const QQ& c, std::optional<QQ>* lowest) {
    std::map<Weight, long> out;
    const QQ h0 = s.pres->head_level();
    const QQ j0 = s.pres->head_charge();
    const QQ th = s.theta;
    const QQ cst = h0 + th * j0 + th * th * c / 6;
    const QQ B = box.max_level + box.head_level - cst;  // need l + th q <= B
    const bool ns2 = s.pres->alg().id == AlgebraId::Ns2;
    const long cstep = ns2 ? 1 : 2;
    const long lstep = ns2 ? 1 : 2;  // doubled level lattice

    if (lowest) lowest->reset();
    auto feasible = [&](long q) { return level_cost(*s.pres, q) + th * q <= B; };
    const long q0 = lattice_argmin(*s.pres, th, cstep, -(1L << 30), 1L << 30);
    std::vector<long> charges;
    for (long q = q0; feasible(q); q -= cstep) charges.push_back(q);
    for (long q = q0 + cstep; feasible(q); q += cstep) charges.push_back(q);

    for (long q : charges) {
        if (box.charge_window) {
            const QQ jp = j0 + q + th * c / 3;
            const QQ ja = jp < 0 ? -jp : jp;
            if (ja > *box.charge_window) continue;
        }
        const QQ lmax = B - th * q;
        const QQ lmin = level_cost(*s.pres, q);
        long dl0 = qq_to_long(lmin * 2);
        dl0 -= ((dl0 % lstep) + lstep) % lstep;
        for (long dl = std::max(dl0, 0L); qq(dl, 2) <= lmax; dl += lstep) {
            const Weight wt{qq(dl, 2), j0 + q};
            const int d = s.pres->dim(wt);
            if (d == 0) continue;
            const Weight img{cst + qq(dl, 2) + th * q, j0 + q + th * c / 3};
            out[img] += d;
            const QQ off = img.level - box.head_level;
            if (lowest && (!*lowest || off < **lowest)) *lowest = off;
        }
    }
    return out;
}

}  // namespace

EulerReport verify_euler(const ResolutionSpec& spec, const Truncation& trunc) {
    validate_spec(spec);
    EulerReport rep;
    const QQ c = spec.params.c();

    if (spec.variant == ResolutionVariant::N2Relaxed ||
        spec.variant == ResolutionVariant::AffineVerma) {
        if (!trunc.charge_window)
            throw std::invalid_argument(variant_name(spec.variant) +
                                        " verification requires a charge window");
    }
    BggSummand head = make_summand(spec, 0, trunc);

    BoxSpec box{head.pres->head_level(), trunc.max_level, trunc.charge_window};

    // Simple character of the head quotient (the right-hand side).
    Truncation head_trunc = trunc;
    bool subsing = false;
    CharacterSeries simple = simple_character(head.pres, head_trunc, 8, &subsing);
    rep.subsingular_seen = subsing;

    // Euler sum with automatic depth.
    std::map<Weight, long> euler;
    auto add_summand = [&](const BggSummand& s, int sign) -> bool {
        std::optional<QQ> lowest;
        auto contrib = summand_contribution(s, box, c, &lowest);
        for (auto& [w, d] : contrib) {
            euler[w] += sign * d;
            if (euler[w] == 0) euler.erase(w);
        }
        rep.term_labels.push_back(s.label);
        rep.term_lowest.push_back(lowest);
        return !contrib.empty();
    };
    add_summand(head, +1);

    const int hard_cap = 64;
    int empty_streak = 0;
    QQ last_lb(-1000000);
    int n = 0;
    const int want_depth = spec.depth;
    while (true) {
        ++n;
        if (n > hard_cap) throw std::runtime_error("resolution depth cap exceeded");
        const int sign = (n % 2 == 0) ? +1 : -1;
        bool any = false;
        QQ lb_min(1000000);
        std::vector<long> idxs{n};
        if (two_sided(spec.variant)) idxs.push_back(-n);
        for (long idx : idxs) {
            BggSummand s = make_summand(spec, idx, trunc);
            const QQ lb = summand_lower_bound(s, box, c);
            if (lb < lb_min) lb_min = lb;
            if (lb <= trunc.max_level) {
                if (add_summand(s, sign)) any = true;
            } else {
                rep.term_labels.push_back(s.label + " (beyond truncation)");
                rep.term_lowest.push_back(std::nullopt);
            }
        }
        if (want_depth >= 0) {
            if (n >= want_depth) break;
            continue;
        }
        if (!any && lb_min > trunc.max_level) {
            if (lb_min >= last_lb) ++empty_streak;
            else empty_streak = 1;
            if (empty_streak >= 2) {
                rep.depth_used = n;
                break;
            }
        } else {
            empty_streak = 0;
        }
        last_lb = lb_min;
    }
    if (want_depth >= 0) rep.depth_used = want_depth;

    // strictly increasing lowest weights (over terms that do contribute)
    {
        QQ prev(-1000000);
        bool first = true;
        for (auto& lo : rep.term_lowest) {
            if (!lo) continue;
            if (!first && !(prev < *lo)) {
                rep.lowest_strictly_increasing = false;
                rep.warnings.push_back("term lowest weights are not strictly increasing");
                break;
            }
            prev = *lo;
            first = false;
        }
    }

    // Compare on the union of keys within the box.
    std::map<Weight, std::pair<long, long>> table;
    for (auto& [w, d] : euler) table[w].first = d;
    for (auto& [w, d] : simple.dim) {
        if (w.level - box.head_level > box.max_level) continue;
        if (box.charge_window) {
            const QQ ja = w.charge < 0 ? -w.charge : w.charge;
            if (ja > *box.charge_window) continue;
        }
        table[w].second = d;
    }
    rep.match = true;
    for (auto& [w, pr] : table) {
        rep.entries.push_back({w, pr.first, pr.second});
        if (pr.first != pr.second) rep.match = false;
    }
    return rep;
}

}  // namespace n2
