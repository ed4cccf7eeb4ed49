#pragma once

#include <functional>
#include <vector>

#include "rfem/mesh.hpp"

namespace rfem {

using MatrixField = std::function<Eigen::Matrix2d(const Vec2&)>;

/// Data of the boundary-value problem
///   -div(A grad u) + w . grad u + c u = f  in Omega,   u = 0 on the boundary.
/// `w` and `c` may be empty (pure diffusion). `exact` / `exact_grad` are
/// optional references for error reporting; `a_constant` short-circuits the
/// coefficient projection in the error estimator.
struct ProblemSpec {
  MatrixField A;
  std::function<Vec2(const Vec2&)> w;
  std::function<double(const Vec2&)> c;
  std::function<double(const Vec2&)> f;
  double eps = 1.0;  ///< diffusion magnitude, kept for reporting
  bool a_constant = true;
  std::function<double(const Vec2&)> exact;
  std::function<Vec2(const Vec2&)> exact_grad;

  bool has_convection() const { return static_cast<bool>(w); }
  bool has_reaction() const { return static_cast<bool>(c); }
};

enum class StabKind { FacetJump, VolumeResidual, DgInteriorPenalty };

/// Stabilisation parameters. The facet penalty weight is
///   sigma = c_sigma * Acal * h^(2*alpha - 1)
/// (Acal = local spectral norm of A), so alpha = 0 gives the classic 1/h law,
/// alpha = 1 gives sigma ~ h, and a literal law sigma ~ h^s corresponds to
/// alpha = (s+1)/2. The volume-residual weight uses h^(2*alpha - 2) to sit at
/// the same scaling level. `theta` is the interior-penalty symmetry switch
/// (1 symmetric, 0 incomplete, -1 nonsymmetric).
struct StabSpec {
  StabKind kind = StabKind::FacetJump;
  double alpha = 1.0;
  double c_sigma = 1.0;
  double theta = 1.0;
};

/// Per-element diffusion magnitude: spectral norm of A at the centroid.
std::vector<double> diffusion_scale(const Mesh& mesh, const MatrixField& A);

/// Facet penalty weights sigma; on interior facets the larger adjacent
/// diffusion magnitude is used.
std::vector<double> facet_sigma(const Mesh& mesh, const StabSpec& stab,
                                const std::vector<double>& scale);

/// Element weights sigma-tilde for the volume-residual stabilisation.
std::vector<double> element_sigma_tilde(const Mesh& mesh, const StabSpec& stab,
                                        const std::vector<double>& scale);

}  // namespace rfem
