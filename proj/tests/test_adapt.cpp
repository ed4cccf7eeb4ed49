#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rfem/adapt.hpp"

using namespace rfem;

namespace {

// singular corner solution on the L-shaped domain: u = phi * psi with
// phi = r^(2/3) sin(2 theta / 3) harmonic and psi a bubble cutting off the
// outer boundary
double corner_angle(const Vec2& x) {
  double t = std::atan2(x.y(), x.x());
  if (t < 0.0) t += 2.0 * 3.14159265358979323846;
  return t;
}

double lshape_u(const Vec2& x) {
  const double r = x.norm();
  const double phi = std::pow(r, 2.0 / 3.0) * std::sin(2.0 * corner_angle(x) / 3.0);
  const double psi = (x.x() * x.x() - 1.0) * (x.y() * x.y() - 1.0);
  return phi * psi;
}

Vec2 lshape_grad(const Vec2& x) {
  const double r = x.norm();
  if (r < 1e-14) return Vec2(0.0, 0.0);
  const double t = corner_angle(x);
  const double phi = std::pow(r, 2.0 / 3.0) * std::sin(2.0 * t / 3.0);
  const Vec2 gphi = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) *
                    Vec2(-std::sin(t / 3.0), std::cos(t / 3.0));
  const double psi = (x.x() * x.x() - 1.0) * (x.y() * x.y() - 1.0);
  const Vec2 gpsi(2.0 * x.x() * (x.y() * x.y() - 1.0), 2.0 * x.y() * (x.x() * x.x() - 1.0));
  return psi * gphi + phi * gpsi;
}

double lshape_f(const Vec2& x) {
  const double r = x.norm();
  if (r < 1e-14) return 0.0;
  const double t = corner_angle(x);
  const double phi = std::pow(r, 2.0 / 3.0) * std::sin(2.0 * t / 3.0);
  const Vec2 gphi = (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) *
                    Vec2(-std::sin(t / 3.0), std::cos(t / 3.0));
  const Vec2 gpsi(2.0 * x.x() * (x.y() * x.y() - 1.0), 2.0 * x.y() * (x.x() * x.x() - 1.0));
  const double lap_psi = 2.0 * (x.x() * x.x() - 1.0) + 2.0 * (x.y() * x.y() - 1.0);
  return -(phi * lap_psi + 2.0 * gphi.dot(gpsi));
}

ProblemSpec lshape_problem() {
  ProblemSpec p;
  p.A = [](const Vec2&) { return Eigen::Matrix2d::Identity().eval(); };
  p.f = lshape_f;
  p.exact = lshape_u;
  p.exact_grad = lshape_grad;
  return p;
}

}  // namespace

TEST_CASE("maximum marking") {
  CHECK_THROWS(mark_maximum({}, 0.25));
  CHECK_THROWS(mark_maximum({1.0}, 0.0));
  CHECK_THROWS(mark_maximum({1.0}, 1.5));
  CHECK(mark_maximum({1.0, 0.3, 0.2, 0.1}, 0.25) == std::vector<int>{0, 1});
  CHECK(mark_maximum({1.0, 0.3, 0.2, 0.1}, 1.0) == std::vector<int>{0});
  CHECK(mark_maximum({0.5, 0.5, 0.5}, 0.25).size() == 3);
}

TEST_CASE("singular fixture satisfies the equation") {
  // second differences reproduce -f away from the corner
  for (const Vec2 x : {Vec2(-0.5, 0.3), Vec2(0.4, 0.6), Vec2(-0.7, -0.4)}) {
    const double h = 1e-5;
    const double lap = (lshape_u(x + Vec2(h, 0)) + lshape_u(x - Vec2(h, 0)) +
                        lshape_u(x + Vec2(0, h)) + lshape_u(x - Vec2(0, h)) - 4.0 * lshape_u(x)) /
                       (h * h);
    CHECK(lap == doctest::Approx(-lshape_f(x)).epsilon(1e-4));
    const Vec2 g((lshape_u(x + Vec2(h, 0)) - lshape_u(x - Vec2(h, 0))) / (2 * h),
                 (lshape_u(x + Vec2(0, h)) - lshape_u(x - Vec2(0, h))) / (2 * h));
    CHECK((g - lshape_grad(x)).norm() < 1e-7);
  }
  // zero trace on both corner edges and the outer square
  CHECK(std::abs(lshape_u(Vec2(0.5, 0.0))) < 1e-15);
  CHECK(std::abs(lshape_u(Vec2(0.0, -0.5))) < 1e-15);
  CHECK(std::abs(lshape_u(Vec2(1.0, 0.5))) < 1e-15);
  CHECK(std::abs(lshape_u(Vec2(-0.3, 1.0))) < 1e-15);
}

TEST_CASE("marked elements are bisected") {
  const Mesh mesh = make_crisscross(2);
  const std::vector<int> marked = {3, 7};
  const Mesh fine = refine(mesh, marked);
  for (int m : marked) {
    int children = 0;
    for (int p : fine.parents())
      if (p == m) ++children;
    CHECK(children >= 2);
  }
}

TEST_CASE("loop stops immediately under a generous tolerance") {
  const ProblemSpec prob = lshape_problem();
  StabSpec stab;
  stab.alpha = 1.0;
  AdaptOptions opt;
  opt.tol = 1e99;
  opt.max_iter = 10;
  const AdaptOutcome out = adapt_loop(make_lshape(2), prob, stab, opt);
  CHECK(out.records.size() == 1);
  CHECK(out.mesh.num_elements() == 48);
  CHECK(out.failure.empty());
}

TEST_CASE("adaptive run concentrates refinement at the corner") {
  const ProblemSpec prob = lshape_problem();
  StabSpec stab;
  stab.alpha = 1.0;
  AdaptOptions opt;
  opt.max_iter = 8;
  opt.tol = 0.0;
  const AdaptOutcome out = adapt_loop(make_lshape(2), prob, stab, opt);
  REQUIRE(out.failure.empty());
  REQUIRE(out.records.size() == 8);

  for (size_t i = 1; i < out.records.size(); ++i)
    CHECK(out.records[i].ndof > out.records[i - 1].ndof);
  for (const AdaptRecord& r : out.records) {
    CHECK(std::isfinite(r.effectivity));
    CHECK(r.effectivity > 0.0);
    CHECK(r.estimator > 0.0);
  }
  for (size_t i = 3; i + 1 < out.records.size(); ++i)
    CHECK(out.records[i + 1].estimator < out.records[i].estimator);

  // elements touching the re-entrant corner end up smaller than typical
  const Mesh& fine = out.mesh;
  std::vector<double> diams;
  double corner_max = 0.0;
  bool corner_seen = false;
  for (int e = 0; e < fine.num_elements(); ++e) {
    diams.push_back(fine.elem_diameter(e));
    for (int v : fine.tri(e))
      if (fine.vertex(v).norm() < 1e-12) {
        corner_max = std::max(corner_max, fine.elem_diameter(e));
        corner_seen = true;
      }
  }
  REQUIRE(corner_seen);
  std::nth_element(diams.begin(), diams.begin() + diams.size() / 2, diams.end());
  CHECK(corner_max < diams[diams.size() / 2]);
}

TEST_CASE("history export") {
  std::vector<AdaptRecord> recs(3);
  for (int i = 0; i < 3; ++i) {
    recs[i].iter = i;
    recs[i].ndof = 10 * (i + 1);
    recs[i].error = 1.0 / (i + 1);
    recs[i].estimator = 2.0 / (i + 1);
    recs[i].effectivity = 2.0;
    recs[i].nelems = 10 * (i + 1);
  }
  const std::string path = "adapt_test.csv";
  write_adapt_csv(recs, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "iter,ndof,error,estimator,effectivity,nelems");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
  std::remove(path.c_str());
}
