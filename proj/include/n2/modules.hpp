#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "n2/linalg.hpp"
#include "n2/pbw.hpp"

namespace n2 {

enum class ModuleKind {
    VermaNs2,
    ChiralVermaNs2,
    VacuumNs2,
    GenVermaNs2,       // V(m) on the N=2 side
    VermaAffine,
    GenVermaAffine,    // V(m) on the affine side
    VacuumAffine,
    RelaxedVermaAffine,
    Gl11Verma,
};

std::string kind_name(ModuleKind k);
std::optional<ModuleKind> kind_from_name(const std::string& s);

// Weight of a vector: level is L0 relative to the cyclic vector (>= 0),
// charge is the absolute J0 / H0 eigenvalue.
struct Weight {
    QQ level;
    QQ charge;
    bool operator<(const Weight& o) const {
        if (level != o.level) return level < o.level;
        return charge < o.charge;
    }
    bool operator==(const Weight& o) const {
        return level == o.level && charge == o.charge;
    }
};

struct Truncation {
    QQ max_level = qq(kDefaultDegreeCap);
    // Absolute bound |charge| <= M; required for relaxed kinds.
    std::optional<QQ> charge_window;
};

// Element of a module in free-basis coordinates: normal-form monomials
// applied to the cyclic vector. Affine zero modes are part of the monomial
// (F0^a or E0^a blocks); Cartan and annihilator modes never appear.
struct ModuleElem {
    std::map<PbwMonomial, QQ> c;

    bool zero() const { return c.empty(); }
    void add(const PbwMonomial& m, const QQ& v) {
        if (v == 0) return;
        auto [it, fresh] = c.emplace(m, v);
        if (!fresh) {
            it->second += v;
            if (it->second == 0) c.erase(it);
        }
    }
    ModuleElem& operator+=(const ModuleElem& o) {
        for (auto& [m, v] : o.c) add(m, v);
        return *this;
    }
    ModuleElem& operator*=(const QQ& s) {
        if (s == 0) {
            c.clear();
            return *this;
        }
        for (auto& [m, v] : c) v *= s;
        return *this;
    }
};

class ModulePresentation;
using PresentationPtr = std::shared_ptr<ModulePresentation>;

// Exact basis of one weight space: spanning free-basis monomials modulo the
// relation subspace, with deterministic ordering.
struct WeightSpaceBasis {
    Weight w;
    std::vector<PbwMonomial> spanning;   // canonical order
    std::vector<SparseRow> rel_rows;     // reduced relation rows (pivot 1)
    std::map<int, int> rel_pivots;       // pivot col -> row
    std::vector<int> basis_cols;         // non-pivot columns
    int dim = 0;
};
using WeightSpacePtr = std::shared_ptr<const WeightSpaceBasis>;

// Vector in a module: exact coordinates in the WeightSpaceBasis at (level,
// charge).
struct ModuleVector {
    PresentationPtr pres;
    Weight w;
    std::vector<QQ> coords;

    bool zero() const {
        for (auto& x : coords)
            if (x != 0) return false;
        return true;
    }
};

struct PresentSpec {
    ModuleKind kind = ModuleKind::VermaNs2;
    Parameters params{2, 1};
    QQ h;           // L0 of the cyclic vector where applicable
    QQ j;           // J0 (ns2) or the sl2 weight j (affine: H0 = 2j); gl11: J
    QQ z;           // gl11 Z-eigenvalue
    long m = 1;     // generalized Verma parameter
    Truncation trunc;
    bool reversed_enum = false;
};

// A cyclic module over one of the three algebras. Immutable once built;
// weight spaces are cached internally (concurrent reads, exclusive insert).
class ModulePresentation : public std::enable_shared_from_this<ModulePresentation> {
  public:
    static PresentationPtr make(const PresentSpec& spec);
    // Clone with one more relation vector (used by the simple-quotient loop).
    PresentationPtr with_extra_relation(const ModuleElem& rel) const;

    const AlgebraSpec& alg() const { return *alg_; }
    AlgebraPtr alg_ptr() const { return alg_; }
    ModuleKind kind() const { return spec_.kind; }
    const PresentSpec& spec() const { return spec_; }
    QQ head_level() const { return h0_; }      // absolute L0 of cyclic vector
    QQ head_charge() const { return j0_; }     // absolute J0/H0 of cyclic vector
    const Truncation& trunc() const { return spec_.trunc; }

    // Relations as stated in the presentation (applied to the cyclic
    // vector); the structural ones are included for reporting.
    const std::vector<EnvElement>& stated_relations() const { return stated_; }
    const std::vector<std::pair<Weight, ModuleElem>>& extra_relations() const {
        return extra_rel_;
    }

    WeightSpacePtr weight_space(const Weight& w) const;
    int dim(const Weight& w) const { return weight_space(w)->dim; }

    // Precomputes the relation closure up to a level so that subsequent
    // weight-space queries below it do not trigger rebuilds.
    void warm(const QQ& level) const { ensure_closure(level); }

    // Applies a single generator mode to an element (free-basis form).
    ModuleElem apply_mode(GeneratorMode x, const ModuleElem& v) const;
    // Applies an enveloping-algebra element.
    ModuleElem apply_env(const EnvElement& u, const ModuleElem& v) const;
    ModuleElem cyclic() const;

    // Free-basis monomials at one weight (before relation reduction).
    std::vector<PbwMonomial> free_monomials(const Weight& w) const;
    // Dimension of the free span at one weight (no relation quotient).
    long free_dim(const Weight& w) const;

    // Conversions between free-basis elements and weight-space coordinates.
    ModuleVector to_coords(const ModuleElem& v) const;       // homogeneous v
    ModuleElem from_coords(const ModuleVector& v) const;
    // Reduce a homogeneous element modulo relations, in free-basis form.
    ModuleElem reduce(const ModuleElem& v) const;

    Weight weight_of(const PbwMonomial& m) const;
    int parity_of(const Weight& w) const;  // 0 even, 1 odd

  private:
    ModulePresentation() = default;

    void init();
    bool basis_factor(GeneratorMode g) const;
    ModuleElem apply_to_cyclic(GeneratorMode x) const;
    ModuleElem apply_mode_mono(GeneratorMode x, const PbwMonomial& m) const;
    void ensure_closure(const QQ& level_cap) const;

    using ModeKey = std::pair<std::pair<uint8_t, int>, PbwMonomial>;

    PresentSpec spec_;
    AlgebraPtr alg_;
    QQ h0_, j0_;
    QQ casimir_;  // relaxed: eigenvalue of the zero-mode Casimir
    std::vector<EnvElement> stated_;
    std::vector<std::pair<Weight, ModuleElem>> extra_rel_;

    mutable std::shared_mutex mtx_;
    mutable std::mutex closure_build_mtx_;
    mutable std::map<Weight, WeightSpacePtr> ws_cache_;
    mutable std::map<ModeKey, ModuleElem> mono_cache_;
    mutable QQ closure_cap_ = qq(-1);
    mutable std::map<Weight, std::vector<ModuleElem>> closure_;
};

// --- module operations -----------------------------------------------------

PresentationPtr present_module(const PresentSpec& spec);

// act: exact module action, errors if the result exceeds the configured
// truncation. e must be weight-homogeneous.
ModuleVector act(const PresentationPtr& pres, const EnvElement& e, const ModuleVector& v);

// Basis of the joint kernel of the positive-part test generators on one
// weight space; vectors normalized with leading coordinate 1.
std::vector<ModuleVector> find_singular(const PresentationPtr& pres, const Weight& w);

// Test generators used by find_singular for this kind.
std::vector<GeneratorMode> positive_tests(const ModulePresentation& pres);

// Truncated bigraded dimension table. Entries are keyed by absolute
// (L0, charge); base_level records the head L0 so relative truncation is
// meaningful.
struct CharacterSeries {
    QQ base_level;
    QQ max_level;                     // keep entries with L0 - base <= max_level
    std::optional<QQ> charge_window;  // |charge| <= window when present
    std::map<Weight, long> dim;       // Weight.level here is ABSOLUTE L0

    bool same_truncation(const CharacterSeries& o) const {
        return base_level == o.base_level && max_level == o.max_level &&
               charge_window == o.charge_window;
    }
};

CharacterSeries subtract(const CharacterSeries& a, const CharacterSeries& b);

// Character of U(lowering + zero modes) . seeds within the truncation.
CharacterSeries submodule_character(const PresentationPtr& pres,
                                    const std::vector<ModuleVector>& seeds,
                                    const Truncation& trunc);

// Simple-quotient character by the singular-vector fixpoint loop. When
// `subsingular_flag` is given it is set if a second pass found new singular
// vectors (a subsingular event).
CharacterSeries simple_character(const PresentationPtr& pres, const Truncation& trunc,
                                 int max_iter = 8, bool* subsingular_flag = nullptr);

// Full character of the presented module at the truncation.
CharacterSeries module_character(const PresentationPtr& pres, const Truncation& trunc);

// PBW product-formula character for free kinds.
CharacterSeries closed_form_character(ModuleKind kind, const Parameters& params,
                                      const QQ& h, const QQ& j, const Truncation& trunc);

// Spectral-flow map on characters: (h, q) -> (h + th q + th^2 c/6, q + th c/3).
CharacterSeries flow_character(const CharacterSeries& ch, const QQ& theta, const QQ& c);

// MFF singular vector for p' = 1: E_{-1}^{p-r} as an enveloping element.
EnvElement mff_vector(const Parameters& params, long r);

}  // namespace n2
