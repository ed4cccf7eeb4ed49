#include "rfem/quadrature.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace rfem {

namespace {

// Golub-Welsch: nodes and weights of an m-point Gauss rule from the monic
// three-term recurrence of the orthogonal polynomials. `diag` holds a_0..a_{m-1},
// `offsq` holds b_1..b_{m-1} and mu0 is the total weight measure.
void golub_welsch(const std::vector<double>& diag, const std::vector<double>& offsq, double mu0,
                  std::vector<double>& nodes, std::vector<double>& weights) {
  const int m = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) J(i, i) = diag[i];
  for (int i = 0; i + 1 < m; ++i) J(i, i + 1) = J(i + 1, i) = std::sqrt(offsq[i]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(m);
  weights.resize(m);
  for (int i = 0; i < m; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double q0 = es.eigenvectors()(0, i);
    weights[i] = mu0 * q0 * q0;
  }
}

// Gauss-Legendre on [0,1], m points (exact to degree 2m-1).
void gauss_legendre01(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  std::vector<double> diag(m, 0.0), offsq;
  for (int k = 1; k < m; ++k) offsq.push_back(k * k / (4.0 * k * k - 1.0));
  golub_welsch(diag, offsq, 2.0, nodes, weights);
  for (int i = 0; i < m; ++i) {
    nodes[i] = 0.5 * (nodes[i] + 1.0);
    weights[i] *= 0.5;
  }
}

// Gauss-Jacobi with weight (1-t) on [0,1], m points; total weight 1/2.
void gauss_jacobi10(int m, std::vector<double>& nodes, std::vector<double>& weights) {
  // Monic Jacobi recurrence on [-1,1] with weight (1-x), i.e. alpha=1, beta=0.
  std::vector<double> diag(m), offsq;
  diag[0] = -1.0 / 3.0;
  for (int k = 1; k < m; ++k) diag[k] = -1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
  if (m > 1) offsq.push_back(2.0 / 9.0);
  for (int k = 2; k < m; ++k) {
    const double d = 2.0 * k + 1.0;
    offsq.push_back(k * (k + 1.0) / (d * d));
  }
  golub_welsch(diag, offsq, 2.0, nodes, weights);
  for (int i = 0; i < m; ++i) {
    nodes[i] = 0.5 * (nodes[i] + 1.0);
    weights[i] *= 0.25;  // dx/2 and the factor (1-x) -> (1-t)/... collapses to 1/4
  }
}

QuadRule build_tri_rule(int degree) {
  const int m = (degree + 2) / 2;  // 2m-1 >= degree
  std::vector<double> xj, wj, xl, wl;
  gauss_jacobi10(m, xj, wj);
  gauss_legendre01(m, xl, wl);
  QuadRule rule;
  rule.exact_degree = degree;
  rule.dim = 2;
  // Collapsed map (xi, eta) -> (xi, eta (1 - xi)) carries the Jacobi weight
  // (1 - xi), so the product weights need no extra Jacobian factor.
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      rule.points.emplace_back(xj[i], xl[j] * (1.0 - xj[i]));
      rule.weights.push_back(wj[i] * wl[j]);
    }
  }
  return rule;
}

QuadRule build_edge_rule(int degree) {
  const int m = (degree + 2) / 2;
  std::vector<double> x, w;
  gauss_legendre01(m, x, w);
  QuadRule rule;
  rule.exact_degree = degree;
  rule.dim = 1;
  for (int i = 0; i < m; ++i) {
    rule.points.emplace_back(x[i], 0.0);
    rule.weights.push_back(w[i]);
  }
  return rule;
}

}  // namespace

const QuadRule& tri_rule(int degree) {
  if (degree < 1 || degree > 8) throw std::invalid_argument("tri_rule: degree must be in 1..8");
  static std::map<int, QuadRule> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, build_tri_rule(degree)).first;
  return it->second;
}

const QuadRule& edge_rule(int degree) {
  if (degree < 1 || degree > 17) throw std::invalid_argument("edge_rule: degree must be in 1..17");
  static std::map<int, QuadRule> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, build_edge_rule(degree)).first;
  return it->second;
}

}  // namespace rfem
