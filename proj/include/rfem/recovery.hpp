#pragma once

#include <Eigen/Sparse>

#include "rfem/fespace.hpp"

namespace rfem {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

/// Sparse nodal-averaging operator E mapping DG coefficients (degree r) to
/// conforming coefficients (degree s >= r): each interior target node takes
/// the arithmetic mean of the traces of the source function over the elements
/// sharing that node; boundary rows are zero, which builds the homogeneous
/// Dirichlet condition into the operator.
struct RecoveryOp {
  SpMat E;  ///< target ndof x source ndof
  const FeSpace* source = nullptr;
  const FeSpace* target = nullptr;
};

/// Local transition matrix: entry (i, j) is source shape function i (degree r)
/// evaluated at target Lagrange node j (degree s); dimensions dim P_r x dim P_s.
Eigen::MatrixXd transition_matrix(int r, int s);

RecoveryOp build_recovery(const FeSpace& dg, const FeSpace& cg);

/// Degenerate recovery: E is the identity on the DG space itself (source ==
/// target), turning the recovered scheme into a plain dG one.
RecoveryOp identity_recovery(const FeSpace& dg);

/// Apply the operator to a source coefficient vector.
FeFunction recover(const RecoveryOp& op, const FeFunction& dg_fn);

/// Numerical rank by dense SVD with relative threshold 1e-10; refuses
/// operators wider than 5000 columns.
int recovery_rank(const RecoveryOp& op);

/// Ratio  sum_T |v - Ev|^2_{alpha,T}  /  || h^(1/2-alpha) [v] ||^2_Gamma  for
/// alpha in {0, 1} (L2 / broken H1 seminorm); 0/0 counts as 0. Boundary
/// facets are part of Gamma with the trace as the jump.
double kp_ratio(const RecoveryOp& op, const FeFunction& v, int alpha);

}  // namespace rfem
