#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "rfem/fespace.hpp"

using namespace rfem;

namespace {
const double pi = std::numbers::pi;

double quad_over_element(const Mesh& mesh, int e, const ScalarField& g, int degree) {
  const QuadRule& rule = tri_rule(degree);
  double s = 0;
  for (size_t q = 0; q < rule.points.size(); ++q)
    s += rule.weights[q] * 2.0 * mesh.area(e) * g(mesh.map_to_physical(e, rule.points[q]));
  return s;
}
}  // namespace

TEST_CASE("Lagrange bases are nodal and form a partition of unity") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int degree = 0; degree <= 3; ++degree) {
    const LocalBasis& basis = local_basis(degree);
    Eigen::VectorXd vals;
    for (int k = 0; k < basis.ldof; ++k) {
      basis.eval(basis.nodes[k], vals);
      for (int i = 0; i < basis.ldof; ++i)
        CHECK(std::abs(vals[i] - (i == k ? 1.0 : 0.0)) < 1e-12);
    }
    for (int trial = 0; trial < 20; ++trial) {
      double x = unif(rng), y = unif(rng) * (1.0 - x);
      basis.eval(Vec2(x, y), vals);
      CHECK(vals.sum() == doctest::Approx(1.0).epsilon(1e-12));
      Eigen::MatrixXd grads;
      basis.eval_grad(Vec2(x, y), grads);
      CHECK(std::abs(grads.col(0).sum()) < 1e-11);
      CHECK(std::abs(grads.col(1).sum()) < 1e-11);
    }
  }
}

TEST_CASE("dof counts on the criss-cross family") {
  Mesh m = make_crisscross(8);

  FeSpace dg0 = build_space(m, SpaceKind::DG, 0);
  CHECK(dg0.ndof == 256);
  FeSpace dg1 = build_space(m, SpaceKind::DG, 1);
  CHECK(dg1.ndof == 768);

  FeSpace cg1 = build_space(m, SpaceKind::CG, 1);
  CHECK(cg1.ndof == 145);
  CHECK(cg1.num_interior_dofs() == 113);  // (n-1)^2 + n^2

  FeSpace cg2 = build_space(m, SpaceKind::CG, 2);
  CHECK(cg2.ndof == 545);  // vertices + one dof per facet

  // Geometric oracle for the boundary flags of the unit square.
  for (const FeSpace& sp : {cg1, cg2}) {
    for (int d = 0; d < sp.ndof; ++d) {
      const Vec2& p = sp.node_coords[d];
      const bool on_boundary = std::abs(p.x()) < 1e-12 || std::abs(p.x() - 1) < 1e-12 ||
                               std::abs(p.y()) < 1e-12 || std::abs(p.y() - 1) < 1e-12;
      CHECK(static_cast<bool>(sp.boundary_dof[d]) == on_boundary);
    }
  }
}

TEST_CASE("CG spaces share dofs across facets (including cubic edge order)") {
  Mesh m = make_crisscross(2);
  for (int degree : {1, 2, 3}) {
    FeSpace sp = build_space(m, SpaceKind::CG, degree);
    // Global map position -> dof must be a bijection: collect by rounded coords.
    std::map<std::pair<long long, long long>, int> seen;
    for (int e = 0; e < m.num_elements(); ++e)
      for (int i = 0; i < sp.ldof; ++i) {
        const int d = sp.dof(e, i);
        const Vec2 p = m.map_to_physical(e, local_basis(degree).nodes[i]);
        const auto key = std::make_pair(llround(p.x() * 1e9), llround(p.y() * 1e9));
        auto [it, inserted] = seen.try_emplace(key, d);
        CHECK(it->second == d);  // same node position => same global dof
      }
    CHECK(static_cast<int>(seen.size()) == sp.ndof);
  }
}

TEST_CASE("interpolation is exact on polynomials of matching degree") {
  Mesh m = make_crisscross(3);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto u1 = [](const Vec2& p) { return 1.0 + 2.0 * p.x() - 0.5 * p.y(); };
  auto u3 = [](const Vec2& p) {
    return p.x() * p.x() * p.x() - 2.0 * p.x() * p.y() * p.y() + p.y() + 0.25;
  };
  FeSpace cg1 = build_space(m, SpaceKind::CG, 1);
  FeSpace cg3 = build_space(m, SpaceKind::CG, 3);
  FeFunction f1 = interpolate(cg1, u1);
  FeFunction f3 = interpolate(cg3, u3);
  for (int trial = 0; trial < 30; ++trial) {
    const int e = rng() % m.num_elements();
    double a = unif(rng), b = unif(rng) * (1 - a);
    const Vec2 ref(a, b);
    const Vec2 x = m.map_to_physical(e, ref);
    CHECK(f1.eval(e, ref) == doctest::Approx(u1(x)).epsilon(1e-12));
    CHECK(f3.eval(e, ref) == doctest::Approx(u3(x)).epsilon(1e-11));
  }
}

TEST_CASE("element-wise L2 projection") {
  Mesh m = make_crisscross(2);
  auto g = [](const Vec2& p) { return p.x() * p.x(); };

  // Piecewise-constant projection: element value = (integral of g)/area.
  FeSpace dg0 = build_space(m, SpaceKind::DG, 0);
  FeFunction p0 = l2_project(dg0, g);
  for (int e = 0; e < m.num_elements(); ++e) {
    const double expected = quad_over_element(m, e, g, 4) / m.area(e);
    CHECK(p0.coef[dg0.dof(e, 0)] == doctest::Approx(expected).epsilon(1e-13));
  }

  // Projection reproduces functions already in the space.
  FeSpace dg2 = build_space(m, SpaceKind::DG, 2);
  FeFunction p2 = l2_project(dg2, g);
  FeFunction i2 = interpolate(dg2, g);
  CHECK((p2.coef - i2.coef).lpNorm<Eigen::Infinity>() < 1e-12);

  CHECK_THROWS(l2_project(build_space(m, SpaceKind::CG, 1), g));
}

TEST_CASE("error norms against a manufactured solution") {
  auto u = [](const Vec2& p) { return std::sin(pi * p.x()) * std::sin(pi * p.y()); };
  auto grad_u = [](const Vec2& p) {
    return Vec2(pi * std::cos(pi * p.x()) * std::sin(pi * p.y()),
                pi * std::sin(pi * p.x()) * std::cos(pi * p.y()));
  };

  Mesh m = make_crisscross(8);
  FeSpace dg1 = build_space(m, SpaceKind::DG, 1);
  FeFunction zero{&dg1, Eigen::VectorXd::Zero(dg1.ndof)};
  ErrorNorms en = error_norms(zero, u, grad_u);
  // ||u||_L2 = 1/2 and |u|_H1 = pi/sqrt(2) for the product of sines.
  CHECK(en.l2 == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(en.h1_semi == doctest::Approx(pi / std::sqrt(2.0)).epsilon(1e-6));

  // Interpolation error halves in H1 when h halves (first order).
  Mesh m2 = make_crisscross(16);
  FeSpace cg_a = build_space(m, SpaceKind::CG, 1);
  FeSpace cg_b = build_space(m2, SpaceKind::CG, 1);
  const double e_a = error_norms(interpolate(cg_a, u), u, grad_u).h1_semi;
  const double e_b = error_norms(interpolate(cg_b, u), u, grad_u).h1_semi;
  CHECK(e_a / e_b > 1.8);
  CHECK(e_a / e_b < 2.2);
}

TEST_CASE("dG norm of the global constant") {
  Mesh m = make_crisscross(1);
  FeSpace dg0 = build_space(m, SpaceKind::DG, 0);
  FeFunction one{&dg0, Eigen::VectorXd::Ones(dg0.ndof)};

  // sigma = 10/h per facet; interior jumps vanish, boundary traces remain.
  std::vector<double> sigma(m.num_facets());
  double expected_sq = 0;
  for (int f = 0; f < m.num_facets(); ++f) {
    sigma[f] = 10.0 / m.facet_h(f);
    if (m.facet(f).is_boundary) expected_sq += sigma[f] * m.facet(f).length;
  }
  CHECK(dg_norm(one, sigma) == doctest::Approx(std::sqrt(expected_sq)).epsilon(1e-13));
  CHECK(expected_sq == doctest::Approx(40.0).epsilon(1e-13));
}

TEST_CASE("dG error norm reduces to the H1 error for conforming functions") {
  auto u = [](const Vec2& p) { return std::sin(pi * p.x()) * std::sin(pi * p.y()); };
  auto grad_u = [](const Vec2& p) {
    return Vec2(pi * std::cos(pi * p.x()) * std::sin(pi * p.y()),
                pi * std::sin(pi * p.x()) * std::cos(pi * p.y()));
  };
  Mesh m = make_crisscross(4);
  FeSpace cg = build_space(m, SpaceKind::CG, 1);
  FeFunction fn = interpolate(cg, u);
  std::vector<double> sigma(m.num_facets());
  for (int f = 0; f < m.num_facets(); ++f) sigma[f] = 10.0 / m.facet_h(f);
  CHECK(dg_norm_error(fn, grad_u, sigma) ==
        doctest::Approx(error_norms(fn, u, grad_u).h1_semi).epsilon(1e-12));
}

TEST_CASE("space construction rejects unsupported degrees") {
  Mesh m = make_crisscross(1);
  CHECK_THROWS(build_space(m, SpaceKind::DG, 4));
  CHECK_THROWS(build_space(m, SpaceKind::CG, 0));
  CHECK_THROWS(build_space(m, SpaceKind::DG, -1));
}
