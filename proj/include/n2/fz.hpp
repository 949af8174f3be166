#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "n2/poly.hpp"
#include "n2/zhu.hpp"

namespace n2 {

// Element of the Frenkel-Zhu bimodule of a chiral Verma module in the
// three-variable polynomial normal form: even part f(x_l, x_r, y), odd part
// g(x_l, x_r, y) psi. Variables: 0 = x_l, 1 = x_r, 2 = y.
struct FZElement {
    Poly f, g;
    bool proportional_to(const FZElement& o) const;
};

// Reduction context for A_id(M+_{j,c}).
class FZContext;
using FZContextPtr = std::shared_ptr<FZContext>;

class FZContext {
  public:
    static FZContextPtr make(const Parameters& params, const QQ& j);

    PresentationPtr chiral() const { return chiral_; }
    PresentationPtr vacuum() const { return vac_; }
    QQ j() const { return j_; }

    // Rewrite a vector of M+ to its span on the residual monomials
    // {L_{-2}, L_{-1}, J_{-1}, G-_{-1/2}} modulo O_id (mode rewrite system).
    ModuleElem rewrite(const ModuleElem& v) const;

    // Full polynomial normal form (solve against monomial images).
    FZElement reduce(const ModuleElem& v) const;

    // Left/right star actions on the bimodule (id twist).
    ModuleElem left_h(const ModuleElem& v) const;
    ModuleElem right_h(const ModuleElem& v) const;
    ModuleElem right_q(const ModuleElem& v) const;

  private:
    FZContext() = default;
    Parameters params_{2, 1};
    QQ j_;
    PresentationPtr chiral_;
    PresentationPtr vac_;
};

// The kernel generators of the (3,2) chiral bimodule quotient, as stated:
// f1..f3 (even) and g1..g3 (odd coefficient), in P = x_l - x_r,
// Q = x_l + x_r + 1/3, R = y + 1/3.
struct FZKernel {
    std::array<Poly, 3> f;
    std::array<Poly, 3> g;
};
FZKernel fz_kernel_generators();

// Right modules of Prop-FR type over A_id(L_{-1}).
struct FusionRight {
    enum class Kind { Eps, Jline } kind = Kind::Eps;
    long eps = 0;      // -1, 0, 1
    QQ j;              // the j-line parameter
    bool parity_flip = false;  // the Pi-twisted module
};

// (h, q) eigenvalues of the right module, derived from module data at
// runtime (simple characters and weight formulas, not hard-coded).
std::pair<QQ, QQ> fusion_right_eigenvalues(const Parameters& params, const FusionRight& r);

struct FusionSummand {
    QQ xl;        // left h eigenvalue
    QQ ql;        // left q eigenvalue
    int parity;   // 0 even, 1 odd (absolute, after any Pi flip)
    int multiplicity;
    std::string name;  // identified simple module, e.g. "C(1)", "Pi C_{1/3}"
};

struct FusionReport {
    int dimension = 0;
    std::vector<FusionSummand> summands;
    int unfactored_degree = 0;  // nonzero would flag non-rational eigenvalues
};

// Tensor of the (3,2) bimodule quotient with a 1-dimensional right module:
// specializes (x_r, y), quotients by the specialized kernel and reports the
// decomposition. f_c, g_c are the computed A_id(L_{-1}) ideal generators
// used to validate the right module.
FusionReport fz_kernel_and_fusion(const Parameters& params, const FusionRight& right,
                                  const Poly& f_c, const Poly& g_c);

}  // namespace n2
