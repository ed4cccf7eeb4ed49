#pragma once

#include <string>

#include "rfem/forms.hpp"

namespace rfem {

/// Per-element error indicators of the residual estimator. `eta` carries the
/// interior residual plus half of each interior facet-jump term, `eta_A` the
/// diffusion-projection defect, `stab` the scaled stabilisation energy
/// h_T^(2*alpha) s_h,T. The total satisfies
///   total^2 = sum_T (eta_T^2 + stab_T + eta_A,T^2).
struct ErrorIndicators {
  std::vector<double> eta;
  std::vector<double> eta_A;
  std::vector<double> stab;
  double total = 0.0;
};

/// Residual estimator for -div(A grad u) = f with the recovered solution
/// cg_fn = E(dg_fn). The flux Pi_A grad(E u_h) is represented exactly in a
/// discontinuous space (Pi_A = element-wise projection of A onto degree s-1
/// polynomials; `a_constant` short-circuits Pi_A = A). Computable without any
/// exact solution by construction.
ErrorIndicators compute_indicators(const RecoveryOp& op, const FeFunction& cg_fn,
                                   const FeFunction& dg_fn, const ScalarField& f,
                                   const MatrixField& A, bool a_constant, const StabSpec& stab);

/// Per-element marking quantity sqrt(eta^2 + stab + eta_A^2).
std::vector<double> marking_indicators(const ErrorIndicators& ind);

/// total / true error; throws on nonpositive error.
double effectivity(const ErrorIndicators& ind, double true_h1_error);

/// Per-element efficiency ratio eta_T^2 / (energy error on the facet-neighbor
/// patch + eta_A,T^2); 0 when the indicator vanishes. Needs prob.exact_grad.
std::vector<double> lower_bound_ratio(const ErrorIndicators& ind, const FeFunction& cg_fn,
                                      const ProblemSpec& prob);

/// CSV export "elem,eta,eta_A,stab,patch_ratio"; pass an empty ratio vector to
/// emit nan in the last column.
void write_indicators_csv(const ErrorIndicators& ind, const std::vector<double>& patch_ratio,
                          const std::string& path);

}  // namespace rfem
