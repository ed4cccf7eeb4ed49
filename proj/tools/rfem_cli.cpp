#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfem/bench.hpp"

using namespace rfem;

namespace {

int g_exit = 0;

void check(bool ok, const std::string& what) {
  if (ok) {
    std::printf("check passed: %s\n", what.c_str());
  } else {
    std::printf("check FAILED: %s\n", what.c_str());
    g_exit = 2;
  }
}

// "results.csv" + tag "rfem-c10" + ext "svg" -> "results-rfem-c10.svg"
std::string tagged_path(const std::string& out, const std::string& tag, const std::string& ext) {
  const size_t dot = out.find_last_of('.');
  const size_t slash = out.find_last_of('/');
  std::string stem = out;
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
    stem = out.substr(0, dot);
  return stem + (tag.empty() ? "" : "-" + tag) + "." + ext;
}

void emit_if_requested(const ConvergenceTable& t, const std::string& out,
                       const std::string& format, const std::string& tag) {
  if (out.empty()) return;
  const std::string path = tagged_path(out, tag, format);
  emit(t, format, path);
  std::printf("wrote %s\n", path.c_str());
}

void dump_triplets(const SpMat& A, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it)
      std::fprintf(f, "%ld %ld %.17g\n", static_cast<long>(it.row()),
                   static_cast<long>(it.col()), it.value());
  std::fclose(f);
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recovered finite element method (R-FEM) benchmark driver"};
  app.require_subcommand(1);

  int r = 0, s = 1, n = 0, iters = 12;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double c_sigma = 1.0, theta = 0.25;
  std::vector<int> levels;
  std::vector<double> eps_list, c_sigmas, alphas;
  std::string format = "csv", out, field = "both";
  std::string mesh_path, matrix_path, recovery_path;
  bool do_check = false, full = false;

  auto* t1 = app.add_subcommand("test1", "smooth-solution convergence study");
  t1->add_option("--r", r, "trial degree");
  t1->add_option("--s", s, "recovery degree");
  t1->add_option("--alpha", alpha, "penalty exponent, sigma = c_sigma*|A|*h^(2*alpha-1); "
                                   "default (s+1)/2 i.e. sigma ~ h^s");
  t1->add_option("--csigma", c_sigma, "penalty constant");
  t1->add_option("--levels", levels, "criss-cross subdivisions")->delimiter(',');
  t1->add_option("--format", format, "csv or svg");
  t1->add_option("--out", out, "output file");
  t1->add_flag("--check", do_check, "verify the expected convergence orders");

  auto* t1dg = app.add_subcommand("test1-dg", "penalty sweep against interior-penalty dG");
  t1dg->add_option("--csigma", c_sigmas, "penalty constants to sweep")->delimiter(',');
  t1dg->add_option("--levels", levels, "criss-cross subdivisions")->delimiter(',');
  t1dg->add_option("--format", format, "csv or svg");
  t1dg->add_option("--out", out, "output file prefix");
  t1dg->add_flag("--check", do_check,
                 "verify a penalty regime beats the dG L2 error on the finest level");

  auto* t2 = app.add_subcommand("test2", "corner-singularity study under uniform refinement");
  t2->add_option("--levels", levels, "L-mesh subdivisions")->delimiter(',');
  t2->add_option("--format", format, "csv or svg");
  t2->add_option("--out", out, "output file");
  t2->add_flag("--check", do_check, "verify the regularity-limited order 2/3");

  auto* t3 = app.add_subcommand("test3", "adaptive corner-singularity run");
  t3->add_option("--theta", theta, "maximum-marking fraction");
  t3->add_option("--n", iters, "adaptive iterations");
  t3->add_option("--format", format, "csv or svg");
  t3->add_option("--out", out, "output file");
  t3->add_option("--dump-mesh", mesh_path, "write the final adapted mesh");
  t3->add_flag("--check", do_check, "verify the error-vs-dofs slope");

  auto* t4 = app.add_subcommand("test4", "convection-diffusion: convergence and layer stability");
  t4->add_option("field", field, "wind field: a (recirculating, manufactured), b (constant, "
                                 "boundary layer), or both");
  t4->add_option("--eps", eps_list, "diffusion magnitudes")->delimiter(',');
  t4->add_option("--n", n, "mesh subdivisions for the stability comparison");
  t4->add_option("--levels", levels, "criss-cross subdivisions for the convergence study")
      ->delimiter(',');
  t4->add_flag("--full", full, "original-scale stability mesh (n=200)");
  t4->add_option("--format", format, "csv or svg");
  t4->add_option("--out", out, "output file prefix");
  t4->add_flag("--check", do_check, "verify the stability ordering (field b)");

  auto* cond = app.add_subcommand("condition", "condition-number growth and matrix sparsity");
  cond->add_option("--alpha", alphas, "penalty exponents")->delimiter(',');
  cond->add_option("--levels", levels, "criss-cross subdivisions")->delimiter(',');
  cond->add_option("--csigma", c_sigma, "penalty constant");
  cond->add_option("--out", out, "write the report to a file as well");
  cond->add_flag("--check", do_check, "verify near-linear growth for alpha <= 1");

  auto* dump = app.add_subcommand("dump", "write mesh / system matrix / recovery operator");
  dump->add_option("--n", n, "criss-cross subdivisions")->capture_default_str();
  dump->add_option("--r", r, "trial degree");
  dump->add_option("--s", s, "recovery degree");
  dump->add_option("--alpha", alpha, "penalty exponent (default 1)");
  dump->add_option("--csigma", c_sigma, "penalty constant");
  dump->add_option("--dump-mesh", mesh_path, "mesh output path");
  dump->add_option("--dump-matrix", matrix_path, "system matrix triplets output path");
  dump->add_option("--dump-recovery", recovery_path, "recovery operator triplets output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*t1) {
      if (levels.empty()) levels = {4, 8, 16, 32, 64};
      if (!std::isfinite(alpha)) alpha = (s + 1) / 2.0;
      const ConvergenceTable t = run_test1(r, s, alpha, c_sigma, levels);
      std::fputs(format_table(t).c_str(), stdout);
      emit_if_requested(t, out, format, "");
      if (do_check) {
        const double eh1 = (r == 1 && s == 3) ? 1.0 : s;
        const double h1 = t.rows.back().h1_eoc, l2 = t.rows.back().l2_eoc;
        check(std::abs(h1 - eh1) <= 0.15,
              "terminal H1 order " + fmt_g(h1) + " within " + fmt_g(eh1) + " +- 0.15");
        check(std::abs(l2 - (eh1 + 1.0)) <= 0.2,
              "terminal L2 order " + fmt_g(l2) + " within " + fmt_g(eh1 + 1.0) + " +- 0.2");
      }
    } else if (*t1dg) {
      if (c_sigmas.empty()) c_sigmas = {10.0, 1.0, 0.1, 0.01};
      if (levels.empty()) levels = {4, 8, 16, 32, 64};
      const DgCompareTables tables = run_test1_dg_compare(c_sigmas, levels);
      for (size_t i = 0; i < tables.rfem.size(); ++i) {
        std::fputs(format_table(tables.rfem[i]).c_str(), stdout);
        emit_if_requested(tables.rfem[i], out, format, "rfem-c" + fmt_g(c_sigmas[i]));
      }
      std::fputs(format_table(tables.ipdg).c_str(), stdout);
      emit_if_requested(tables.ipdg, out, format, "ipdg");
      if (do_check) {
        const double dg_l2 = tables.ipdg.rows.back().l2_error;
        double best = std::numeric_limits<double>::infinity();
        for (const ConvergenceTable& t : tables.rfem)
          best = std::min(best, t.rows.back().l2_error);
        check(best <= dg_l2, "some penalty constant reaches L2 error " + fmt_g(best) +
                                 " <= dG L2 error " + fmt_g(dg_l2));
      }
    } else if (*t2) {
      if (levels.empty()) levels = {4, 8, 16, 32, 64};
      const ConvergenceTable t = run_test2(levels);
      std::fputs(format_table(t).c_str(), stdout);
      emit_if_requested(t, out, format, "");
      if (do_check) {
        const double h1 = t.rows.back().h1_eoc;
        check(std::abs(h1 - 2.0 / 3.0) <= 0.15,
              "terminal H1 order " + fmt_g(h1) + " within 2/3 +- 0.15");
      }
    } else if (*t3) {
      const AdaptOutcome res = run_test3(theta, iters);
      std::printf("# test3 method=RFEM r=0 s=1 alpha=1 c_sigma=1 theta=%g mesh=lshape\n", theta);
      std::printf("%5s %8s %8s %12s %12s %12s %8s\n", "iter", "ndof", "cg_int", "error",
                  "estimator", "effectivity", "nelems");
      for (const AdaptRecord& rec : res.records)
        std::printf("%5d %8d %8d %12.5g %12.5g %12.5g %8d\n", rec.iter, rec.ndof, rec.interior_cg,
                    rec.error, rec.estimator, rec.effectivity, rec.nelems);
      if (!res.failure.empty()) std::printf("solver failure: %s\n", res.failure.c_str());
      if (!out.empty()) {
        if (format == "svg") {
          ConvergenceTable t;
          t.name = "test3";
          t.provenance = "test3 method=RFEM r=0 s=1 alpha=1 c_sigma=1 theta=" + fmt_g(theta) +
                         " mesh=lshape-adaptive";
          for (const AdaptRecord& rec : res.records) {
            ConvergenceRow row;
            row.level = rec.iter;
            row.ndof = rec.ndof;
            row.h1_error = rec.error;
            t.rows.push_back(row);
          }
          const std::string path = tagged_path(out, "", "svg");
          write_table_svg(t, path);
          std::printf("wrote %s\n", path.c_str());
        } else {
          const std::string path = tagged_path(out, "", "csv");
          write_adapt_csv(res.records, path);
          std::printf("wrote %s\n", path.c_str());
        }
      }
      if (!mesh_path.empty()) {
        write_mesh(res.mesh, mesh_path);
        std::printf("wrote %s\n", mesh_path.c_str());
      }
      if (do_check) {
        std::vector<double> ndofs, errors;
        for (const AdaptRecord& rec : res.records) {
          ndofs.push_back(rec.ndof);
          errors.push_back(rec.error);
        }
        const double slope = fit_loglog(ndofs, errors).slope;
        check(res.failure.empty(), "all adaptive solves succeeded");
        check(slope >= -0.65 && slope <= -0.35,
              "error-vs-dofs slope " + fmt_g(slope) + " in [-0.65, -0.35]");
      }
    } else if (*t4) {
      if (field != "a" && field != "b" && field != "both")
        throw CLI::ValidationError("field must be a, b, or both");
      if (field == "a" || field == "both") {
        std::vector<double> eps_a = eps_list.empty() ? std::vector<double>{1e-1, 1e-4} : eps_list;
        if (levels.empty()) levels = {4, 8, 16, 32};
        for (double eps : eps_a) {
          const ConvergenceTable t = run_test4_convergence(eps, levels);
          std::fputs(format_table(t).c_str(), stdout);
          emit_if_requested(t, out, format, "a-eps" + fmt_g(eps));
          if (do_check && field == "a" && eps == eps_a.front()) {
            const double h1 = t.rows.back().h1_eoc;
            check(std::abs(h1 - 1.0) <= 0.5, "terminal H1 order " + fmt_g(h1) + " near 1");
          }
        }
      }
      if (field == "b" || field == "both") {
        const std::vector<double> eps_b =
            eps_list.empty() ? std::vector<double>{1e-2, 1e-3} : eps_list;
        const int nb = n > 0 ? n : (full ? 200 : 64);
        const StabilityReport rep = run_test4_stability(eps_b, nb);
        std::fputs(format_stability(rep).c_str(), stdout);
        if (!out.empty()) {
          const std::string path = tagged_path(out, "b", "csv");
          write_stability_csv(rep, path);
          std::printf("wrote %s\n", path.c_str());
        }
        if (do_check) {
          const StabilityRow& last = rep.rows.back();
          check(last.rfem_finite && last.dg_finite, "both solves are finite");
          check(last.rfem_overshoot < last.dg_overshoot,
                "recovered overshoot " + fmt_g(last.rfem_overshoot) + " < dG overshoot " +
                    fmt_g(last.dg_overshoot) + " at eps=" + fmt_g(last.eps));
        }
      }
    } else if (*cond) {
      if (alphas.empty()) alphas = {0.0, 1.0, 3.0};
      if (levels.empty()) levels = {4, 8, 16, 32};
      const ConditionReport rep = run_condition(alphas, levels, c_sigma);
      const std::string text = format_condition(rep);
      std::fputs(text.c_str(), stdout);
      if (!out.empty()) {
        std::FILE* f = std::fopen(out.c_str(), "w");
        if (!f) throw std::runtime_error("cannot open " + out);
        std::fputs(text.c_str(), f);
        std::fclose(f);
        std::printf("wrote %s\n", out.c_str());
      }
      if (do_check) {
        for (const ConditionSeries& ser : rep.series)
          if (ser.alpha <= 1.0)
            check(ser.fitted_exponent >= 0.7 && ser.fitted_exponent <= 1.3,
                  "alpha=" + fmt_g(ser.alpha) + " growth exponent " +
                      fmt_g(ser.fitted_exponent) + " in [0.7, 1.3]");
        for (const ConditionSeries& ser : rep.series)
          if (ser.alpha > 1.0)
            for (const ConditionSeries& other : rep.series)
              if (other.alpha <= 1.0)
                check(ser.kappa.back() > other.kappa.back(),
                      "alpha=" + fmt_g(ser.alpha) + " conditioning exceeds alpha=" +
                          fmt_g(other.alpha) + " on the finest mesh");
      }
    } else if (*dump) {
      if (n <= 0) n = 8;
      if (!std::isfinite(alpha)) alpha = 1.0;
      if (mesh_path.empty() && matrix_path.empty() && recovery_path.empty())
        throw CLI::ValidationError(
            "dump needs at least one of --dump-mesh/--dump-matrix/--dump-recovery");
      const Mesh mesh = make_crisscross(n);
      if (!mesh_path.empty()) {
        write_mesh(mesh, mesh_path);
        std::printf("wrote %s\n", mesh_path.c_str());
      }
      if (!matrix_path.empty() || !recovery_path.empty()) {
        const FeSpace dg = build_space(mesh, SpaceKind::DG, r);
        const FeSpace cg = build_space(mesh, SpaceKind::CG, s);
        const RecoveryOp op = build_recovery(dg, cg);
        if (!recovery_path.empty()) {
          dump_triplets(op.E, recovery_path);
          std::printf("wrote %s\n", recovery_path.c_str());
        }
        if (!matrix_path.empty()) {
          StabSpec stab;
          stab.alpha = alpha;
          stab.c_sigma = c_sigma;
          dump_triplets(build_rfem_system(op, sinsin_problem(), stab).A, matrix_path);
          std::printf("wrote %s\n", matrix_path.c_str());
        }
      }
    }
  } catch (const CLI::Error& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return g_exit;
}
