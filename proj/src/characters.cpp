#include <deque>
#include <stdexcept>

#include "n2/modules.hpp"

namespace n2 {

namespace {

bool ns2_like(ModuleKind k) {
    switch (k) {
        case ModuleKind::VermaNs2:
        case ModuleKind::ChiralVermaNs2:
        case ModuleKind::VacuumNs2:
        case ModuleKind::GenVermaNs2: return true;
        default: return false;
    }
}

// Doubled level lattice step: 1 for ns2 (half-integer levels), 2 for affine.
long dlevel_step(ModuleKind k) { return ns2_like(k) ? 1 : 2; }

// Relative charge bounds reachable at doubled level dl for the module kind;
// both inclusive, in charge units (J0 steps of 1, H0 steps of 2).
std::pair<long, long> charge_reach(const ModulePresentation& pres, long dl) {
    const ModuleKind k = pres.kind();
    if (ns2_like(k)) return {-dl, dl};  // one G mode per half level at most
    if (k == ModuleKind::Gl11Verma) return {-1, 0};
    // affine: E/F negative modes shift +-2 per unit level
    long reach = dl;  // dl/2 levels * 2 charge
    long lo = -reach, hi = reach;
    if (k == ModuleKind::VermaAffine) lo = -(1 << 30);  // F0 tail unbounded
    if (k == ModuleKind::GenVermaAffine || k == ModuleKind::VacuumAffine)
        lo = -reach - 2 * (pres.spec().m - 1);
    if (k == ModuleKind::RelaxedVermaAffine) {
        lo = -(1 << 30);
        hi = (1 << 30);
    }
    return {lo, hi};
}

// Clamp relative charge range to the presentation window when present.
std::pair<QQ, QQ> charge_range(const ModulePresentation& pres, const Truncation& trunc,
                               long dl) {
    auto [lo, hi] = charge_reach(pres, dl);
    QQ qlo = pres.head_charge() + lo;
    QQ qhi = pres.head_charge() + hi;
    if (trunc.charge_window) {
        const QQ M = *trunc.charge_window;
        if (qlo < -M) qlo = -M;
        if (qhi > M) qhi = M;
    } else if (lo <= -(1 << 29) || hi >= (1 << 29)) {
        throw std::invalid_argument(
            "character of an unbounded-charge kind requires a charge window");
    }
    return {qlo, qhi};
}

}  // namespace

CharacterSeries subtract(const CharacterSeries& a, const CharacterSeries& b) {
    if (!a.same_truncation(b))
        throw std::invalid_argument("character subtraction requires matching truncations");
    CharacterSeries out = a;
    for (auto& [w, d] : b.dim) {
        out.dim[w] -= d;
        if (out.dim[w] == 0) out.dim.erase(w);
    }
    return out;
}

CharacterSeries module_character(const PresentationPtr& pres, const Truncation& trunc) {
    CharacterSeries ch;
    ch.base_level = pres->head_level();
    ch.max_level = trunc.max_level;
    ch.charge_window = trunc.charge_window;
    const long step = dlevel_step(pres->kind());
    const long dmax = qq_to_long(trunc.max_level * 2);
    pres->warm(trunc.max_level);
    for (long dl = 0; dl <= dmax; dl += step) {
        auto [qlo, qhi] = charge_range(*pres, trunc, dl);
        const long cstep = ns2_like(pres->kind()) || pres->kind() == ModuleKind::Gl11Verma ? 1 : 2;
        for (QQ q = qlo; q <= qhi; q += cstep) {
            const int d = pres->dim(Weight{qq(dl, 2), q});
            if (d > 0) ch.dim[Weight{pres->head_level() + qq(dl, 2), q}] = d;
        }
    }
    return ch;
}

CharacterSeries submodule_character(const PresentationPtr& pres,
                                    const std::vector<ModuleVector>& seeds,
                                    const Truncation& trunc) {
    // Span closure of U(lowering + zero modes) . seeds, level by level.
    struct WInfo {
        SpanBuilder span{0};
        std::map<PbwMonomial, int> index;
        std::vector<PbwMonomial> mono;
    };
    std::map<Weight, WInfo> at;
    const AlgebraSpec& alg = pres->alg();
    const QQ maxlev = trunc.max_level;
    pres->warm(maxlev);

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
    auto offer = [&](const ModuleElem& raw) {
        if (raw.zero()) return;
        ModuleElem v = pres->reduce(raw);
        if (v.zero()) return;
        Weight w = pres->weight_of(v.c.begin()->first);
        if (w.level > maxlev) return;
        if (trunc.charge_window) {
            QQ qa = w.charge < 0 ? -w.charge : w.charge;
            if (qa > *trunc.charge_window) return;
        }
        WInfo& wi = at[w];
        SparseRow rem = wi.span.reduce(to_row(wi, v));
        if (rem.empty()) return;
        wi.span.add(rem);
        queue.push_back({w, from_row(wi, rem)});
    };

    for (auto& s : seeds) offer(pres->from_coords(s));

    const long dmax = qq_to_long(maxlev * 2);
    while (!queue.empty()) {
        auto [w, v] = queue.front();
        queue.pop_front();
        const long dl = qq_to_long(w.level * 2);
        for (std::size_t fi = 0; fi < alg.families.size(); ++fi) {
            const FamilyInfo& f = alg.families[fi];
            if (f.zero_only) {
                if (f.name == "Psi-" || f.name == "Psi+")
                    offer(pres->apply_mode(GeneratorMode{static_cast<uint8_t>(fi), 0}, v));
                continue;
            }
            // zero modes (affine ladder only; Cartans are scalars here)
            if (!f.half_modes && (f.name == "E" || f.name == "F"))
                offer(pres->apply_mode(GeneratorMode{static_cast<uint8_t>(fi), 0}, v));
            // lowering modes within the truncation
            const int d0 = f.half_modes ? -1 : -2;
            for (int dm = d0; dl - dm <= dmax; dm -= 2)
                offer(pres->apply_mode(GeneratorMode{static_cast<uint8_t>(fi), dm}, v));
        }
    }

    CharacterSeries ch;
    ch.base_level = pres->head_level();
    ch.max_level = trunc.max_level;
    ch.charge_window = trunc.charge_window;
    for (auto& [w, wi] : at)
        if (wi.span.dim() > 0)
            ch.dim[Weight{pres->head_level() + w.level, w.charge}] = wi.span.dim();
    return ch;
}

CharacterSeries simple_character(const PresentationPtr& pres, const Truncation& trunc,
                                 int max_iter, bool* subsingular_flag) {
    if (subsingular_flag) *subsingular_flag = false;
    PresentationPtr cur = pres;
    const long step = dlevel_step(pres->kind());
    const long dmax = qq_to_long(trunc.max_level * 2);

    for (int iter = 1;; ++iter) {
        if (iter > max_iter)
            throw std::runtime_error("simple-quotient fixpoint did not converge");
        bool found_any = false;
        cur->warm(trunc.max_level);
        for (long dl = step; dl <= dmax; dl += step) {
            auto [qlo, qhi] = charge_range(*cur, trunc, dl);
            const long cstep =
                ns2_like(cur->kind()) || cur->kind() == ModuleKind::Gl11Verma ? 1 : 2;
            for (QQ q = qlo; q <= qhi; q += cstep) {
                auto vs = find_singular(cur, Weight{qq(dl, 2), q});
                if (vs.empty()) continue;
                found_any = true;
                if (iter >= 2 && subsingular_flag) *subsingular_flag = true;
                for (auto& v : vs) cur = cur->with_extra_relation(cur->from_coords(v));
            }
        }
        if (!found_any) break;
    }
    return module_character(cur, trunc);
}

CharacterSeries closed_form_character(ModuleKind kind, const Parameters& params, const QQ& h,
                                      const QQ& j, const Truncation& trunc) {
    if (kind != ModuleKind::VermaNs2 && kind != ModuleKind::ChiralVermaNs2 &&
        kind != ModuleKind::VermaAffine && kind != ModuleKind::RelaxedVermaAffine)
        throw std::invalid_argument("no closed-form character for kind " + kind_name(kind));

    const bool ns2 = kind == ModuleKind::VermaNs2 || kind == ModuleKind::ChiralVermaNs2;
    const long dmax = qq_to_long(trunc.max_level * 2);
    long cwin;  // relative charge window in charge units
    if (trunc.charge_window) {
        // translate the absolute window into a relative one
        QQ j0 = ns2 ? j : 2 * j;
        QQ lo = -*trunc.charge_window - j0, hi = *trunc.charge_window - j0;
        cwin = std::max(qq_to_long(hi < 0 ? -hi : hi) + 2,
                        qq_to_long(lo < 0 ? -lo : lo) + 2);
    } else {
        if (kind == ModuleKind::VermaAffine || kind == ModuleKind::RelaxedVermaAffine)
            throw std::invalid_argument("affine closed-form character requires a charge window");
        cwin = dmax + 1;
    }

    // DP over modes: table indexed by (doubled level, relative charge).
    const long W = 2 * cwin + 1;
    std::vector<std::vector<long>> tab(dmax + 1, std::vector<long>(W, 0));
    auto at = [&](long dl, long q) -> long& { return tab[dl][q + cwin]; };
    at(0, 0) = 1;

    struct Mode {
        long dcost;
        long charge;
        bool fermi;
    };
    std::vector<Mode> modes;
    if (ns2) {
        for (long n = 1; 2 * n <= dmax; ++n) {
            modes.push_back({2 * n, 0, false});  // L_{-n}
            modes.push_back({2 * n, 0, false});  // J_{-n}
        }
        for (long dd = 1; dd <= dmax; dd += 2) {
            // G+ modes: chiral excludes -1/2
            if (!(kind == ModuleKind::ChiralVermaNs2 && dd == 1))
                modes.push_back({dd, 1, true});
            modes.push_back({dd, -1, true});  // G-
        }
    } else {
        for (long n = 1; 2 * n <= dmax; ++n) {
            modes.push_back({2 * n, 2, false});   // E_{-n}
            modes.push_back({2 * n, 0, false});   // H_{-n}
            modes.push_back({2 * n, -2, false});  // F_{-n}
        }
    }

    for (auto& md : modes) {
        if (md.fermi) {
            // multiply by (1 + q^cost z^charge), descending to avoid reuse
            for (long dl = dmax; dl >= md.dcost; --dl)
                for (long q = -cwin; q <= cwin; ++q) {
                    const long q0 = q - md.charge;
                    if (q0 < -cwin || q0 > cwin) continue;
                    at(dl, q) += tab[dl - md.dcost][q0 + cwin];
                }
        } else {
            // multiply by 1/(1 - q^cost z^charge), ascending for the geometric sum
            for (long dl = md.dcost; dl <= dmax; ++dl)
                for (long q = -cwin; q <= cwin; ++q) {
                    const long q0 = q - md.charge;
                    if (q0 < -cwin || q0 > cwin) continue;
                    at(dl, q) += tab[dl - md.dcost][q0 + cwin];
                }
        }
    }

    // Affine zero-mode tails.
    if (kind == ModuleKind::VermaAffine || kind == ModuleKind::RelaxedVermaAffine) {
        std::vector<std::vector<long>> base = tab;
        for (long dl = 0; dl <= dmax; ++dl)
            for (long q = -cwin; q <= cwin; ++q) {
                if (base[dl][q + cwin] == 0) continue;
                for (long d = 1;; ++d) {  // F0^d
                    const long qq2 = q - 2 * d;
                    if (qq2 < -cwin) break;
                    at(dl, qq2) += base[dl][q + cwin];
                }
                if (kind == ModuleKind::RelaxedVermaAffine) {
                    for (long d = 1;; ++d) {  // E0^d
                        const long qq2 = q + 2 * d;
                        if (qq2 > cwin) break;
                        at(dl, qq2) += base[dl][q + cwin];
                    }
                }
            }
    }

    CharacterSeries ch;
    ch.base_level = h;
    ch.max_level = trunc.max_level;
    ch.charge_window = trunc.charge_window;
    const QQ j0 = ns2 ? j : 2 * j;
    const long step = ns2 ? 1 : 2;
    for (long dl = 0; dl <= dmax; dl += step)
        for (long q = -cwin; q <= cwin; ++q) {
            const long d = tab[dl][q + cwin];
            if (d == 0) continue;
            Weight w{h + qq(dl, 2), j0 + q};
            if (trunc.charge_window) {
                QQ qa = w.charge < 0 ? -w.charge : w.charge;
                if (qa > *trunc.charge_window) continue;
            }
            ch.dim[w] = d;
        }
    return ch;
}

CharacterSeries flow_character(const CharacterSeries& ch, const QQ& theta, const QQ& c) {
    CharacterSeries out;
    out.base_level = ch.base_level;  // caller re-anchors as needed
    out.max_level = ch.max_level;
    out.charge_window = ch.charge_window;
    for (auto& [w, d] : ch.dim) {
        Weight nw{w.level + theta * w.charge + theta * theta * c / 6,
                  w.charge + theta * c / 3};
        out.dim[nw] += d;
    }
    return out;
}

}  // namespace n2
