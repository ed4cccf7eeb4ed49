#pragma once

#include "rfem/problem.hpp"
#include "rfem/recovery.hpp"

namespace rfem {

/// Stiffness matrix sum_T int_T (A grad phi_j) . grad phi_i over the space's
/// own dof map: conforming stiffness on CG spaces, broken stiffness on DG.
SpMat assemble_stiffness(const FeSpace& space, const MatrixField& A);

/// Facet-jump stabilisation  S_ij = sum_F sigma int_F [phi_j][phi_i]  over all
/// facets; boundary facets penalize the trace.
SpMat assemble_jump_penalty(const FeSpace& dg, const std::vector<double>& sigma);

/// Volume-residual stabilisation  int_Omega sigma~ (phi_j - E phi_j)(phi_i - E phi_i).
SpMat assemble_volume_stab(const RecoveryOp& op, const std::vector<double>& sigma_tilde);

/// Jump penalty plus interior-penalty consistency terms
///   sum_F int_F ( sigma [u][v] - {A grad u}.[v] - theta {A grad v}.[u] ),
/// i.e. the facet part of the interior-penalty dG bilinear form.
SpMat assemble_dg_stab(const FeSpace& dg, const MatrixField& A, const std::vector<double>& sigma,
                       double theta);

/// Complete interior-penalty dG matrix (broken stiffness + facet terms),
/// assembled in a single independent pass.
SpMat assemble_ip_dg(const FeSpace& dg, const MatrixField& A, const std::vector<double>& sigma,
                     double theta);

/// Upwind convection: sum_T [ int_T (w . grad u) v - int_{inflow bdry of T}
/// (w.n)(u+ - u_ext) v+ ] with exterior value 0 on domain-inflow facets.
SpMat assemble_upwind(const FeSpace& dg, const std::function<Vec2(const Vec2&)>& w);

/// Weighted mass matrix int_T c phi_j phi_i (block diagonal on DG spaces).
SpMat assemble_mass(const FeSpace& space, const ScalarField& c);

/// Load vector int f phi_i on the given space.
Eigen::VectorXd assemble_load(const FeSpace& space, const ScalarField& f, int quad_degree = -1);

/// Right-hand side of the recovered system: E^T applied to the target-space
/// load vector, realizing l(E v).
Eigen::VectorXd rfem_rhs(const RecoveryOp& op, const Eigen::VectorXd& load_target);

/// Stabilisation energy s_h(u, u) split per element (facet contributions are
/// halved between the two adjacent elements; boundary facets count fully).
std::vector<double> stab_local_energy(const RecoveryOp& op, const StabSpec& stab,
                                      const MatrixField& A, const FeFunction& u);

}  // namespace rfem
