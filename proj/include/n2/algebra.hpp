#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "n2/rational.hpp"

namespace n2 {

enum class AlgebraId { Ns2, AffineSl2, Gl11 };

// Coprime (p, p') with p >= 2, p' >= 1. Fixes a = p'/p, the admissible
// level k = -2 + 1/a and the central charge c = 3(1 - 2a).
struct Parameters {
    long p = 0;
    long pp = 0;

    QQ a() const { return qq(pp, p); }
    QQ k() const { return qq(-2) + qq(p, pp); }
    QQ c() const { return qq(3) * (qq(1) - qq(2 * pp, p)); }

    static Parameters make(long p, long pp);  // validates
};

// j_{m,n} = (m-1)/2 - n/(2a)
QQ weight_jmn(const Parameters& par, long m, long n);
// Delta(j) = j(j+1)/(k+2)
QQ sugawara_delta(const Parameters& par, const QQ& j);

// Index sets of admissible weights.
bool in_ikw(const Parameters& par, long m, long n);
bool in_ibpz(const Parameters& par, long m, long n);

struct FamilyInfo {
    std::string name;
    bool odd = false;
    bool half_modes = false;  // modes in Z+1/2 (doubled odd) vs Z (doubled even)
    bool zero_only = false;   // gl(1|1): single mode 0
    QQ charge;                // J0 / H0 charge carried by the family
    int pbw_rank = 0;         // tie-break order at equal mode
};

// One generator mode X_m. Modes are stored doubled so half-integer modes
// stay integral. Central elements are never modes: brackets evaluate them
// to scalars eagerly.
struct GeneratorMode {
    uint8_t fam = 0;
    int dmode = 0;  // 2*m

    QQ mode() const { return qq(dmode, 2); }
    // Structural order for containers; the PBW order lives in AlgebraSpec.
    friend auto operator<=>(const GeneratorMode&, const GeneratorMode&) = default;
};

// Finite linear combination of generator modes plus a scalar multiple of
// the unit; the value type of the bracket.
struct LinComb {
    std::map<std::pair<int, uint8_t>, QQ> terms;  // (dmode, fam) -> coeff
    QQ scalar;                                    // coefficient of 1

    void add(GeneratorMode g, const QQ& c) {
        if (c == 0) return;
        auto key = std::make_pair(g.dmode, g.fam);
        auto [it, fresh] = terms.emplace(key, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) terms.erase(it);
        }
    }
    bool zero() const { return terms.empty() && scalar == 0; }
};

struct AlgebraSpec {
    AlgebraId id;
    std::string name;
    Parameters params;            // unused for gl11
    std::string central_name;     // "C", "K" or "" (gl11)
    QQ central_value;
    std::vector<FamilyInfo> families;

    int family_index(const std::string& fname) const;
    GeneratorMode gen(const std::string& fname, const QQ& mode) const;
    const FamilyInfo& fam(const GeneratorMode& g) const { return families[g.fam]; }
    bool odd(const GeneratorMode& g) const { return families[g.fam].odd; }
    // L0-level drop of the mode (positive for creation operators).
    QQ level_drop(const GeneratorMode& g) const { return -g.mode(); }
    QQ charge(const GeneratorMode& g) const { return families[g.fam].charge; }
    void validate_mode(const GeneratorMode& g) const;

    // PBW order: ascending mode, family rank breaking ties.
    bool pbw_less(const GeneratorMode& x, const GeneratorMode& y) const {
        if (x.dmode != y.dmode) return x.dmode < y.dmode;
        return families[x.fam].pbw_rank < families[y.fam].pbw_rank;
    }
};

using AlgebraPtr = std::shared_ptr<const AlgebraSpec>;

// Builds one of the three algebras with central elements bound to scalars.
AlgebraPtr build_algebra(AlgebraId id, const Parameters& params);
AlgebraPtr build_algebra(const std::string& name, const Parameters& params);

// Super bracket [x, y] (anticommutator when both odd), exact, central terms
// folded into the scalar part.
LinComb bracket(const AlgebraSpec& spec, GeneratorMode x, GeneratorMode y);

using BracketFn =
    std::function<LinComb(const AlgebraSpec&, GeneratorMode, GeneratorMode)>;

struct JacobiViolation {
    GeneratorMode x, y, z;
    std::string detail;
};

struct JacobiReport {
    std::string algebra;
    long window = 0;
    std::vector<JacobiViolation> violations;
    long triples_checked = 0;
    bool ok() const { return violations.empty(); }
};

// Evaluates the graded Jacobi identity on all generator triples with
// |mode| <= window. An injected bracket lets tests corrupt the table.
JacobiReport check_super_jacobi(const AlgebraSpec& spec, long window,
                                const BracketFn& bf = {});

// Super-antisymmetry sweep over a mode window (report-only, like Jacobi).
bool check_antisymmetry(const AlgebraSpec& spec, long window);

// Spectral flow automorphism of ns2 at mode level, theta in (1/2)Z given
// doubled. Convention: U(L_n) = L_n + th J_n + th^2 c/6 d_{n,0},
// U(J_n) = J_n + th c/3 d_{n,0}, U(G+-_r) = G+-_{r +- th}.
LinComb spectral_flow_generator(const AlgebraSpec& spec, int dtheta, GeneratorMode x);

// Enumerates all modes of the algebra with |mode| <= window (doubled bound
// 2*window), in PBW order.
std::vector<GeneratorMode> modes_in_window(const AlgebraSpec& spec, long window);

}  // namespace n2
