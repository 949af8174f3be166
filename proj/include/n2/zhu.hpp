#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "n2/modules.hpp"
#include "n2/poly.hpp"

namespace n2 {

enum class Twist { Id, Sigma };
inline std::string twist_name(Twist g) { return g == Twist::Id ? "id" : "sigma"; }

// A_g(V_c) at bounded degree: the computed span of O_g intersected with
// V_{<= Delta}, with a stabilization certificate over the slack.
class ZhuContext;
using ZhuContextPtr = std::shared_ptr<const ZhuContext>;

// Element of A_sigma(V_c) through the gl(1|1) normal form
// P1(Z,J) + P2(Z,J) Psi- Psi+ (variables 0 = Z, 1 = J).
struct Gl11Element {
    Poly p1, p2;
    bool proportional_to(const Gl11Element& o) const;
};

// Coset of a vector of V_{<=Delta} modulo the O_g-span: deterministic
// reduced coordinates.
struct ZhuCoset {
    SparseRow reduced;  // column = context basis index
    bool zero() const { return reduced.empty(); }
    bool operator==(const ZhuCoset& o) const { return reduced == o.reduced; }
};

// Mode application A_(n) v for A in the vacuum module and v in any ns2
// module: generator fields by the mode table, composites by the standard
// iterate (Borcherds) expansion.
ModuleElem field_mode_apply(const PresentationPtr& vac, const PresentationPtr& target,
                            const ModuleElem& A, long n, const ModuleElem& v);

// Twisted star and circle products of Appendix-style type. A must be
// L0-homogeneous in V_c; v is a homogeneous vector of the target module.
ModuleElem zhu_star_left(Twist g, const PresentationPtr& vac, const PresentationPtr& target,
                         const ModuleElem& A, const ModuleElem& v);
ModuleElem zhu_star_right(Twist g, const PresentationPtr& vac, const PresentationPtr& target,
                          const ModuleElem& v, const ModuleElem& A);
ModuleElem zhu_circle(Twist g, const PresentationPtr& vac, const PresentationPtr& target,
                      const ModuleElem& A, const ModuleElem& v);

class ZhuContext {
  public:
    // Builds the O_g-span at degree cutoff Delta: circle products A o B over
    // PBW basis vectors with wt A + wt B + 1 <= Delta + slack, intersected
    // with V_{<=Delta}; the slack is raised until the intersection dimension
    // stabilizes twice in a row (certificate retained).
    static ZhuContextPtr build(Twist g, const Parameters& params, const QQ& delta,
                               long initial_slack = 2, long max_slack = 6);

    Twist twist() const { return g_; }
    const Parameters& params() const { return params_; }
    QQ delta() const { return delta_; }
    long slack_used() const { return slack_used_; }
    const std::vector<long>& stabilization_dims() const { return stab_dims_; }
    PresentationPtr vacuum() const { return vac_; }

    // Filtered dimension of A_g(V_c) at level cutoff X <= Delta.
    long quotient_dim(const QQ& x) const;
    // Expected dims: U(gl(1|1)) for sigma, C[h,q] for id, under the induced
    // filtration (deg Z/h = 2, J/q = 1, Psi = 3/2).
    static long expected_quotient_dim(Twist g, const QQ& x);
    // Certificate: computed dims match the expected ones on the whole ladder.
    bool certified() const { return certified_; }

    // Deterministic reduction modulo the O-span. v must live in V_{<=Delta}.
    ZhuCoset reduce(const ModuleElem& v) const;
    ModuleElem coset_representative(const ZhuCoset& c) const;

    // Vector space V_{<=Delta}: column indexing shared by cosets.
    const std::vector<std::pair<Weight, PbwMonomial>>& columns() const { return cols_; }
    int column_of(const Weight& w, const PbwMonomial& m) const;

    // Star product of cosets (left action on V itself).
    ZhuCoset star(const ZhuCoset& a, const ZhuCoset& b) const;

    ModuleElem gen_L() const;  // L_{-2}1
    ModuleElem gen_J() const;
    ModuleElem gen_Gp() const;
    ModuleElem gen_Gm() const;
    ModuleElem unit() const;

  private:
    ZhuContext() = default;
    Twist g_ = Twist::Sigma;
    Parameters params_{2, 1};
    QQ delta_;
    long slack_used_ = 0;
    std::vector<long> stab_dims_;
    bool certified_ = false;
    PresentationPtr vac_;
    std::vector<std::pair<Weight, PbwMonomial>> cols_;  // descending level order
    std::map<std::pair<Weight, PbwMonomial>, int> colix_;
    std::vector<SparseRow> orows_;      // reduced O-span rows within V_{<=Delta}
    std::map<int, int> opivot_;         // pivot col -> row
};

// Solves for the unique gl(1|1) polynomial whose sigma-twisted star
// evaluation reduces to the given coset. Errors when the solve fails.
Gl11Element coset_to_gl11(const ZhuContextPtr& ctx, const ZhuCoset& coset);

// Id-twisted counterpart: polynomial in (h, q) (variables 0 = h, 1 = q).
Poly coset_to_poly(const ZhuContextPtr& ctx, const ZhuCoset& coset);

// Action of a gl(1|1) normal form on the 2-dimensional Verma M_{z,j}: the
// scalars on the highest line and on the Psi^- line, plus whether the action
// on the simple quotient L_{z,j} vanishes.
struct Gl11Action {
    QQ on_highest;
    QQ on_lower;
    bool zero_on_simple;
};
Gl11Action gl11_action(const Gl11Element& phi, const QQ& z, const QQ& j);

}  // namespace n2
