#pragma once

#include <vector>

#include "rfem/mesh.hpp"

namespace rfem {

/// Quadrature rule on the reference triangle {x,y >= 0, x+y <= 1} (dim == 2,
/// weights sum to 1/2) or on the reference interval [0,1] (dim == 1, points in
/// the x component, weights sum to 1). All weights are positive.
struct QuadRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exact_degree = 0;
  int dim = 2;
};

/// Triangle rule exact for polynomials of total degree <= degree (1..8),
/// built as a conical product of Gauss-Jacobi and Gauss-Legendre rules.
const QuadRule& tri_rule(int degree);

/// Gauss-Legendre rule on [0,1] exact to the given degree (1..17).
const QuadRule& edge_rule(int degree);

}  // namespace rfem
