#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rfem/mesh.hpp"
#include "rfem/quadrature.hpp"

namespace rfem {

enum class SpaceKind { DG, CG };

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Lagrange shape functions on the reference triangle. Node ordering: the
/// three vertices, then degree-1 nodes per edge (edge i joins local vertices
/// (i+1)%3 and (i+2)%3, nodes ordered from the first toward the second), then
/// interior nodes.
struct LocalBasis {
  int degree = 0;
  int ldof = 0;
  std::vector<Vec2> nodes;
  Eigen::MatrixXd coef;  ///< row i: monomial coefficients of shape function i

  void eval(const Vec2& p, Eigen::VectorXd& values) const;
  /// Reference gradients, ldof x 2.
  void eval_grad(const Vec2& p, Eigen::MatrixXd& grads) const;
};

const LocalBasis& local_basis(int degree);

/// Shape-function values/gradients tabulated at the points of a quadrature
/// rule (cached; reference-frame gradients).
struct Tabulation {
  Eigen::MatrixXd values;      ///< npts x ldof
  Eigen::MatrixXd grad_x;      ///< npts x ldof
  Eigen::MatrixXd grad_y;
};
const Tabulation& tabulate(int degree, const QuadRule& rule);

/// Scalar Lagrange space on a mesh: discontinuous (DG, degree 0..3) or
/// conforming (CG, degree 1..3). Immutable after construction.
struct FeSpace {
  const Mesh* mesh = nullptr;
  SpaceKind kind = SpaceKind::DG;
  int degree = 0;
  int ndof = 0;
  int ldof = 0;
  std::vector<int> elem_dofs;        ///< ldof entries per element
  std::vector<char> boundary_dof;    ///< per-dof flag (always false for DG)
  std::vector<Vec2> node_coords;     ///< physical position of each dof

  int dof(int elem, int local) const { return elem_dofs[elem * ldof + local]; }
  int num_boundary_dofs() const;
  int num_interior_dofs() const { return ndof - num_boundary_dofs(); }
};

FeSpace build_space(const Mesh& mesh, SpaceKind kind, int degree);

/// Physical-frame basis evaluation on one element at a reference point.
struct BasisEval {
  Eigen::VectorXd values;
  Eigen::MatrixXd grads;  ///< ldof x 2, physical frame
};
BasisEval eval_basis(const FeSpace& space, int elem, const Vec2& ref);

/// Coefficient vector over a space. Holds a non-owning pointer: the space
/// (and its mesh) must outlive the function.
struct FeFunction {
  const FeSpace* space = nullptr;
  Eigen::VectorXd coef;

  double eval(int elem, const Vec2& ref) const;
  Vec2 grad(int elem, const Vec2& ref) const;
};

/// Nodal interpolant.
FeFunction interpolate(const FeSpace& space, const ScalarField& u);

/// Element-wise L2 projection (block-diagonal mass solve); DG spaces only.
FeFunction l2_project(const FeSpace& space, const ScalarField& g, int quad_degree = -1);

struct ErrorNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;  ///< broken for DG functions
};
ErrorNorms error_norms(const FeFunction& fn, const ScalarField& u, const VectorField& grad_u,
                       int quad_degree = -1);

/// Broken energy norm sqrt(sum_T |w|_{1,T}^2 + sum_F sigma |[w]|^2) with the
/// given per-facet weights (boundary facets use the trace as the jump).
double dg_norm(const FeFunction& fn, const std::vector<double>& sigma_facet);

/// Same norm applied to (u - fn) for an exact solution u that is continuous
/// with zero boundary trace, so all jump content comes from fn.
double dg_norm_error(const FeFunction& fn, const VectorField& grad_u,
                     const std::vector<double>& sigma_facet, int quad_degree = -1);

/// CSV export: "x,y,value" per dof for CG; "elem,x,y,value" per element-local
/// node for DG.
void write_function_csv(const FeFunction& fn, const std::string& path);

}  // namespace rfem
