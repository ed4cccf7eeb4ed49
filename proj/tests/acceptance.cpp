// Acceptance checks for the recovered finite element library. Each check
// prints one PASS/FAIL line with its tolerances; the exit status is the
// number of failed checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rfem/adapt.hpp"
#include "rfem/bench.hpp"
#include "rfem/estimator.hpp"
#include "rfem/fespace.hpp"
#include "rfem/forms.hpp"
#include "rfem/mesh.hpp"
#include "rfem/problem.hpp"
#include "rfem/recovery.hpp"
#include "rfem/system.hpp"

using namespace rfem;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& detail) {
  std::printf("criterion %2d %s  %s\n", idx, ok ? "PASS" : "FAIL", detail.c_str());
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

Eigen::VectorXd random_vector(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(gen);
  return v;
}

const MatrixField kIdentityA = [](const Vec2&) { return Eigen::Matrix2d::Identity(); };
const ScalarField kZero = [](const Vec2&) { return 0.0; };
const VectorField kZeroGrad = [](const Vec2&) { return Vec2(0, 0); };

// 1. Smooth-problem convergence orders for four (r, s, alpha) setups on
//    criss-cross meshes n = 4..64, within pinned bands, under a time budget.
void criterion1() {
  struct Config {
    int r, s;
    double alpha;
    double h1_expect, l2_expect;
  };
  const std::vector<Config> configs = {
      {0, 1, 1.0, 1.0, 2.0},
      {1, 2, 1.5, 2.0, 3.0},
      {2, 3, 2.0, 3.0, 4.0},
      {1, 3, 2.0, 1.0, 2.0},
  };
  const std::vector<int> levels = {4, 8, 16, 32, 64};
  const double h1_tol = 0.15, l2_tol = 0.2, budget_s = 120.0;

  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (const Config& c : configs) {
    const ConvergenceTable t = run_test1(c.r, c.s, c.alpha, 1.0, levels);
    const ConvergenceRow& last = t.rows.back();
    const bool here = std::abs(last.h1_eoc - c.h1_expect) <= h1_tol &&
                      std::abs(last.l2_eoc - c.l2_expect) <= l2_tol;
    ok = ok && here;
    detail += fmt("r%ds%d H1 %.2f/%g L2 %.2f/%g  ", c.r, c.s, last.h1_eoc, c.h1_expect,
                  last.l2_eoc, c.l2_expect);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && secs < budget_s;
  detail += fmt("(H1 +/-%.2f, L2 +/-%.1f; %.1fs < %.0fs)", h1_tol, l2_tol, secs, budget_s);
  report(1, ok, "smooth-problem EOC bands: " + detail);
}

// 2. With equal trial and recovery degrees the recovered solution coincides
//    with the conforming one for any penalty size.
void criterion2() {
  const double tol = 1e-9;
  double worst = 0.0;
  for (int n : {4, 8}) {
    const Mesh mesh = make_crisscross(n);
    for (int deg : {1, 2}) {
      const FeSpace dg = build_space(mesh, SpaceKind::DG, deg);
      const FeSpace cg = build_space(mesh, SpaceKind::CG, deg);
      const RecoveryOp op = build_recovery(dg, cg);
      for (double c : {0.01, 1.0, 100.0}) {
        StabSpec stab;
        stab.alpha = 1.0;
        stab.c_sigma = c;
        worst = std::max(worst, fem_equivalence_gap(op, sinsin_problem(), stab));
      }
    }
  }
  report(2, worst < tol,
         fmt("equal-degree solutions match the conforming solve: max gap %.3e < %.0e "
             "(r=s in {1,2}, c_sigma in {0.01,1,100}, n in {4,8})",
             worst, tol));
}

// 3. Identity recovery plus the dG stabilisation reassembles the
//    interior-penalty matrix and right-hand side entrywise.
void criterion3() {
  const double tol = 1e-13;
  double worst = 0.0;
  for (int n : {2, 4}) {
    const Mesh mesh = make_crisscross(n);
    for (int r : {1, 2}) {
      const FeSpace dg = build_space(mesh, SpaceKind::DG, r);
      for (double theta : {1.0, 0.0, -1.0}) {
        StabSpec stab;
        stab.kind = StabKind::DgInteriorPenalty;
        stab.alpha = 0.0;
        stab.c_sigma = 10.0;
        stab.theta = theta;
        worst = std::max(worst, dg_equivalence_gap(dg, sinsin_problem(), stab));
      }
    }
  }
  report(3, worst <= tol,
         fmt("identity recovery degenerates to interior-penalty dG: max entry gap %.3e <= %.0e "
             "(r in {1,2}, theta in {1,0,-1}, n in {2,4})",
             worst, tol));
}

// 4. Energy identity of the recovered bilinear form on random vectors, both
//    stabilisation kinds.
void criterion4() {
  const double tol = 1e-11;
  double worst = 0.0;
  unsigned seed = 1000;
  for (int n : {4, 8}) {
    const Mesh mesh = make_crisscross(n);
    const auto scale = diffusion_scale(mesh, kIdentityA);
    struct Pair {
      int r, s;
    };
    for (const Pair p : {Pair{0, 1}, Pair{1, 2}}) {
      const FeSpace dg = build_space(mesh, SpaceKind::DG, p.r);
      const FeSpace cg = build_space(mesh, SpaceKind::CG, p.s);
      const RecoveryOp op = build_recovery(dg, cg);
      const SpMat K = assemble_stiffness(cg, kIdentityA);
      const SpMat EKE = SpMat(op.E.transpose()) * SpMat(K * op.E);

      StabSpec jstab;
      jstab.alpha = 1.0;
      jstab.c_sigma = 2.3;
      const auto sigma = facet_sigma(mesh, jstab, scale);
      const SpMat Aj = EKE + assemble_jump_penalty(dg, sigma);

      StabSpec vstab = jstab;
      vstab.kind = StabKind::VolumeResidual;
      const SpMat Av = EKE + assemble_volume_stab(op, element_sigma_tilde(mesh, vstab, scale));

      for (int k = 0; k < 50; ++k) {
        const FeFunction w{&dg, random_vector(dg.ndof, seed++)};
        const FeFunction rw = recover(op, w);
        const double h1r = error_norms(rw, kZero, kZeroGrad).h1_semi;

        const double lhs_j = w.coef.dot(Aj * w.coef);
        const double h1w = error_norms(w, kZero, kZeroGrad).h1_semi;
        const double dgn = dg_norm(w, sigma);
        const double rhs_j = h1r * h1r + (dgn * dgn - h1w * h1w);
        worst = std::max(worst, std::abs(lhs_j - rhs_j) / std::max(std::abs(lhs_j), std::abs(rhs_j)));

        const double lhs_v = w.coef.dot(Av * w.coef);
        double stot = 0.0;
        for (double t : stab_local_energy(op, vstab, kIdentityA, w)) stot += t;
        const double rhs_v = h1r * h1r + stot;
        worst = std::max(worst, std::abs(lhs_v - rhs_v) / std::max(std::abs(lhs_v), std::abs(rhs_v)));
      }
    }
  }
  report(4, worst < tol,
         fmt("energy identity on 100 random vectors per mesh and kind: max relative error "
             "%.3e < %.0e (n in {4,8}, facet-jump and volume-residual)",
             worst, tol));
}

// 5. Condition number growth: fitted exponent in [0.7, 1.3] for alpha in
//    {0, 1}; the alpha = 3 series is strictly largest on the finest level.
void criterion5() {
  const double lo = 0.7, hi = 1.3;
  const ConditionReport rep = run_condition({0.0, 1.0, 3.0}, {4, 8, 16, 32});
  bool ok = rep.series.size() == 3;
  std::string detail;
  double kappa_a3 = 0.0, kappa_other = 0.0;
  for (const ConditionSeries& s : rep.series) {
    if (s.alpha <= 1.0) {
      ok = ok && s.fitted_exponent >= lo && s.fitted_exponent <= hi;
      detail += fmt("alpha=%g exponent %.3f  ", s.alpha, s.fitted_exponent);
      kappa_other = std::max(kappa_other, s.kappa.back());
    } else {
      kappa_a3 = s.kappa.back();
    }
  }
  ok = ok && kappa_a3 > kappa_other;
  detail += fmt("(band [%.1f,%.1f]); finest kappa alpha=3 %.3e > %.3e", lo, hi, kappa_a3,
                kappa_other);
  report(5, ok, "conditioning growth: " + detail);
}

// 6. The recovery matrix has full rank onto the interior conforming dofs.
void criterion6() {
  bool ok = true;
  std::string detail;
  for (int n : {2, 4, 8}) {
    const Mesh mesh = make_crisscross(n);
    const FeSpace dg = build_space(mesh, SpaceKind::DG, 0);
    const FeSpace cg = build_space(mesh, SpaceKind::CG, 1);
    const RecoveryOp op = build_recovery(dg, cg);
    const int rank = recovery_rank(op);
    const int interior = cg.num_interior_dofs();
    ok = ok && rank == interior;
    detail += fmt("n=%d rank %d/%d  ", n, rank, interior);
  }
  report(6, ok, "recovery rank equals interior conforming dofs: " + detail + "(exact match)");
}

// 7. The jump-to-recovery-defect ratio stays level-independent: its max over
//    random functions varies by less than a factor 2 across meshes.
void criterion7() {
  const double band = 2.0;
  bool ok = true;
  std::string detail;
  for (int alpha : {0, 1}) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int n : {4, 8, 16}) {
      const Mesh mesh = make_crisscross(n);
      const FeSpace dg = build_space(mesh, SpaceKind::DG, 0);
      const FeSpace cg = build_space(mesh, SpaceKind::CG, 1);
      const RecoveryOp op = build_recovery(dg, cg);
      double worst = 0.0;
      for (int k = 0; k < 100; ++k) {
        const FeFunction v{&dg, random_vector(dg.ndof, 5000u + 100u * n + k)};
        worst = std::max(worst, kp_ratio(op, v, alpha));
      }
      lo = std::min(lo, worst);
      hi = std::max(hi, worst);
    }
    ok = ok && hi / lo < band;
    detail += fmt("alpha=%d spread %.3f  ", alpha, hi / lo);
  }
  report(7, ok,
         "jump/defect ratio level-independent over 100 random functions, n in {4,8,16}: " +
             detail + fmt("(< %g)", band));
}

struct Test3Cache {
  std::optional<AdaptOutcome> outcome;
  const AdaptOutcome& get() {
    if (!outcome) outcome = run_test3(0.25, 12);
    return *outcome;
  }
};

// 8. Estimator reliability and efficiency: effectivity in a factor-2 band
//    across uniform levels, patch efficiency bounded across levels, and the
//    adaptive run's effectivity bounded over 11 iterations.
void criterion8(Test3Cache& cache) {
  const double band = 2.0;
  const double eff_lo = 1.0, eff_hi = 10.0;
  const ProblemSpec prob = sinsin_problem();
  StabSpec stab;
  stab.alpha = 1.0;
  stab.c_sigma = 1.0;

  double rat_lo = std::numeric_limits<double>::infinity(), rat_hi = 0.0;
  double lbr_lo = std::numeric_limits<double>::infinity(), lbr_hi = 0.0;
  for (int n : {4, 8, 16, 32}) {
    const Mesh mesh = make_crisscross(n);
    const FeSpace dg = build_space(mesh, SpaceKind::DG, 0);
    const FeSpace cg = build_space(mesh, SpaceKind::CG, 1);
    const RecoveryOp op = build_recovery(dg, cg);
    const FeFunction uh{&dg, solve(build_rfem_system(op, prob, stab))};
    const FeFunction ru = recover(op, uh);
    const ErrorIndicators ind = compute_indicators(op, ru, uh, prob.f, prob.A, true, stab);
    const double err = error_norms(ru, prob.exact, prob.exact_grad).h1_semi;
    const double eff = effectivity(ind, err);
    rat_lo = std::min(rat_lo, eff);
    rat_hi = std::max(rat_hi, eff);
    const std::vector<double> lbr = lower_bound_ratio(ind, ru, prob);
    const double mx = *std::max_element(lbr.begin(), lbr.end());
    lbr_lo = std::min(lbr_lo, mx);
    lbr_hi = std::max(lbr_hi, mx);
  }
  const bool uniform_ok = rat_hi / rat_lo < band;
  const bool lbr_ok = lbr_hi / lbr_lo < band;

  const AdaptOutcome& out = cache.get();
  bool adapt_ok = out.failure.empty() && out.records.size() >= 11;
  double aeff_lo = std::numeric_limits<double>::infinity(), aeff_hi = 0.0;
  for (size_t i = 0; i < 11 && i < out.records.size(); ++i) {
    const double e = out.records[i].effectivity;
    adapt_ok = adapt_ok && std::isfinite(e) && e >= eff_lo && e <= eff_hi;
    aeff_lo = std::min(aeff_lo, e);
    aeff_hi = std::max(aeff_hi, e);
  }
  report(8, uniform_ok && lbr_ok && adapt_ok,
         fmt("estimator bounds: effectivity spread %.3f and patch-ratio spread %.3f across "
             "uniform levels (< %g); adaptive effectivity in [%.2f, %.2f] over 11 iterations "
             "(within [%g, %g])",
             rat_hi / rat_lo, lbr_hi / lbr_lo, band, aeff_lo, aeff_hi, eff_lo, eff_hi));
}

// 9. Adaptive refinement recovers the optimal error-vs-dofs slope on the
//    reentrant corner while uniform refinement stays at the reduced order.
void criterion9(Test3Cache& cache) {
  const double slope_lo = -0.65, slope_hi = -0.35;
  const double eoc_expect = 2.0 / 3.0, eoc_tol = 0.15;

  const AdaptOutcome& out = cache.get();
  std::vector<double> ndofs, errors;
  for (const AdaptRecord& r : out.records) {
    if (std::isfinite(r.error) && r.error > 0) {
      ndofs.push_back(static_cast<double>(r.ndof));
      errors.push_back(r.error);
    }
  }
  const LineFit f = fit_loglog(ndofs, errors);
  const bool adapt_ok = f.slope >= slope_lo && f.slope <= slope_hi;

  const ConvergenceTable t2 = run_test2({4, 8, 16, 32, 64});
  const double eoc = t2.rows.back().h1_eoc;
  const bool uniform_ok = std::abs(eoc - eoc_expect) <= eoc_tol;

  report(9, adapt_ok && uniform_ok,
         fmt("corner-singularity rates: adaptive slope %.3f in [%g, %g]; uniform EOC %.3f "
             "within %.3f +/- %.2f",
             f.slope, slope_lo, slope_hi, eoc, eoc_expect, eoc_tol));
}

// 10. Boundary-layer stability: the recovered scheme overshoots strictly less
//     than upwind interior-penalty dG at eps = 1e-3 on the n = 64 mesh, both
//     solves finite; the symmetric part of the upwind convection matrix for
//     the divergence-free wind is positive semidefinite.
void criterion10() {
  const double psd_tol = -1e-10;
  const StabilityReport rep = run_test4_stability({1e-2, 1e-3}, 64);
  const StabilityRow& row = rep.rows.back();
  const bool order_ok =
      row.rfem_finite && row.dg_finite && row.rfem_overshoot < row.dg_overshoot;

  const Mesh mesh = make_crisscross(8);
  const FeSpace dg = build_space(mesh, SpaceKind::DG, 0);
  const ProblemSpec prob = convection_problem_a(1.0);
  const SpMat C = assemble_upwind(dg, prob.w);
  const Eigen::MatrixXd sym = 0.5 * (Eigen::MatrixXd(C) + Eigen::MatrixXd(C).transpose());
  const double lambda_min = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym)
                                .eigenvalues()
                                .minCoeff();
  const bool psd_ok = lambda_min >= psd_tol;

  report(10, order_ok && psd_ok,
         fmt("layer stability: overshoot %.4f < %.4f at eps=1e-3, n=64, both finite; "
             "upwind symmetric part lambda_min %.2e >= %.0e",
             row.rfem_overshoot, row.dg_overshoot, lambda_min, psd_tol));
}

template <typename F>
void guarded(int idx, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(idx, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  Test3Cache cache;
  guarded(1, [] { criterion1(); });
  guarded(2, [] { criterion2(); });
  guarded(3, [] { criterion3(); });
  guarded(4, [] { criterion4(); });
  guarded(5, [] { criterion5(); });
  guarded(6, [] { criterion6(); });
  guarded(7, [] { criterion7(); });
  guarded(8, [&] { criterion8(cache); });
  guarded(9, [&] { criterion9(cache); });
  guarded(10, [] { criterion10(); });
  std::printf("acceptance: %d of 10 criteria passed\n", 10 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
