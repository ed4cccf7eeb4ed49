#pragma once

#include "rfem/forms.hpp"

namespace rfem {

/// Assembled linear system. `dofs` maps system rows back to space dofs when
/// the system was reduced by boundary-condition elimination (empty means the
/// identity map).
struct LinearSystem {
  SpMat A;
  Eigen::VectorXd rhs;
  bool symmetric = true;
  std::vector<int> dofs;
};

/// Recovered scheme over the operator's source space:
///   A = E^T K E + S,  rhs = E^T b,
/// with K the conforming stiffness on the target space and S the requested
/// stabilisation. Convection (upwind) and reaction (mass) are added natively
/// on the source space. DgInteriorPenalty requires an identity recovery and
/// swaps E^T K E + S for broken stiffness + interior-penalty facet terms.
LinearSystem build_rfem_system(const RecoveryOp& op, const ProblemSpec& prob, const StabSpec& stab);

/// Conforming system with homogeneous Dirichlet conditions eliminated: rows
/// and columns are reduced to the interior dofs (see LinearSystem::dofs).
/// Diffusion plus optional reaction; convection is not supported here.
LinearSystem build_fem_system(const FeSpace& cg, const ProblemSpec& prob);

/// Interior-penalty dG system (plus upwind convection and reaction mass when
/// the problem carries them).
LinearSystem build_ipdg_system(const FeSpace& dg, const ProblemSpec& prob, const StabSpec& stab);

/// Solve to a relative residual below 1e-10 (checked; throws with the
/// achieved residual otherwise). Direct factorization below 200000 unknowns,
/// preconditioned Krylov iteration above.
Eigen::VectorXd solve(const LinearSystem& sys);

/// Scatter a solution vector back onto the space (zero on eliminated dofs).
FeFunction solution_function(const FeSpace& space, const LinearSystem& sys,
                             const Eigen::VectorXd& u);

/// l2 condition number of a symmetric positive definite matrix: largest
/// eigenvalue by power iteration, smallest by LDLT-based inverse iteration,
/// both to 1e-6 relative tolerance; throws if either fails to converge.
double condition_estimate(const SpMat& A, int max_iter = 20000);

/// Max-norm distance between the recovered solution's conforming coefficients
/// and the plain conforming solve, for r == s (where the jump stabilisation
/// is invisible to conforming test functions).
double fem_equivalence_gap(const RecoveryOp& op, const ProblemSpec& prob, const StabSpec& stab);

/// Max-norm distance between the identity-recovery interior-penalty system
/// and the directly assembled dG system (matrix entries and rhs).
double dg_equivalence_gap(const FeSpace& dg, const ProblemSpec& prob, const StabSpec& stab);

}  // namespace rfem
