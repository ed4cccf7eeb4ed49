#pragma once

#include <limits>
#include <string>
#include <vector>

#include "rfem/adapt.hpp"

namespace rfem {

/// One refinement level of a convergence study. Optional columns (dG-norm
/// error, condition number) stay NaN when a study does not fill them, as do
/// the EOC entries of the first row.
struct ConvergenceRow {
  int level = 0;  ///< mesh parameter n
  double h = 0.0;
  int ndof = 0;  ///< trial (discontinuous) dofs
  double l2_error = std::numeric_limits<double>::quiet_NaN();
  double h1_error = std::numeric_limits<double>::quiet_NaN();
  double dg_error = std::numeric_limits<double>::quiet_NaN();
  double l2_eoc = std::numeric_limits<double>::quiet_NaN();
  double h1_eoc = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
};

struct ConvergenceTable {
  std::string name;
  std::string provenance;  ///< method, r, s, alpha, c_sigma, sigma law, mesh family
  std::vector<ConvergenceRow> rows;
};

/// Manufactured smooth Dirichlet problem: u = sin(pi x) sin(pi y) on the unit
/// square, A = I, f = 2 pi^2 sin(pi x) sin(pi y).
ProblemSpec sinsin_problem();

/// Corner-singularity benchmark on the L-shaped domain: u = r^(2/3)
/// sin(2 theta/3) (x^2-1)(y^2-1), the radial factor harmonic, the bubble
/// cutting off the outer boundary; f from the product rule.
ProblemSpec lshape_problem();

/// Convection-diffusion -eps Lap u + w . grad u = f with the divergence-free
/// recirculating wind w = ((2y-1)(1-x^2), 2xy(y-1)) and f manufactured from
/// u = sin(pi x) sin(pi y).
ProblemSpec convection_problem_a(double eps);

/// Convection-diffusion with constant wind w = (1,1) and f = 1: outflow
/// boundary layers, exact solution inside [0, 1] but unknown in closed form.
ProblemSpec convection_problem_b(double eps);

/// Orders log(e_i/e_{i+1}) / log(h_i/h_{i+1}) between consecutive rows
/// (result has one entry less than the inputs).
std::vector<double> eoc(const std::vector<double>& errors, const std::vector<double>& hs);

/// Fill the EOC columns of a table from its error and h columns.
void fill_eoc(ConvergenceTable& table);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Least-squares line through (log x_i, log y_i); needs at least two positive
/// finite points.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// CSV with a leading "# ..." provenance comment and the column schema
/// "level,h,ndof,L2_error,H1_error,dG_error,L2_EOC,H1_EOC,kappa"; numbers are
/// printed with 17 significant digits so a re-parse is bit-exact.
void write_table_csv(const ConvergenceTable& table, const std::string& path);

/// Self-contained log-log SVG chart of the error columns against ndof, with a
/// reference triangle showing each series' fitted slope.
void write_table_svg(const ConvergenceTable& table, const std::string& path);

/// Dispatch on format "csv" or "svg"; anything else throws.
void emit(const ConvergenceTable& table, const std::string& format, const std::string& path);

/// Plain-text rendering for terminal output.
std::string format_table(const ConvergenceTable& table);

/// Smooth-problem convergence study on criss-cross meshes: recovered solution
/// errors per level with the facet-jump stabilisation sigma = c_sigma A h^(2 alpha - 1).
ConvergenceTable run_test1(int r, int s, double alpha, double c_sigma,
                           const std::vector<int>& levels);

struct DgCompareTables {
  std::vector<ConvergenceTable> rfem;  ///< one table per penalty constant
  ConvergenceTable ipdg;
};

/// Lowest-order penalty sweep: recovered solves with sigma = c h for each c in
/// `c_sigmas` against one interior-penalty P1 dG solve with sigma = 10/h, both
/// reporting L2 and dG-norm errors per level.
DgCompareTables run_test1_dg_compare(const std::vector<double>& c_sigmas,
                                     const std::vector<int>& levels);

/// Corner-singularity study under uniform refinement (r=0, s=1, sigma = h).
ConvergenceTable run_test2(const std::vector<int>& levels);

/// Adaptive corner-singularity run driven by the residual estimator
/// (maximum marking, r=0, s=1, sigma = h), starting from the coarse L-mesh.
AdaptOutcome run_test3(double theta = 0.25, int max_iter = 12);

/// Convergence of the recovered upwind scheme for the recirculating wind at
/// fixed eps (r=0, s=1, sigma = c_sigma eps h).
ConvergenceTable run_test4_convergence(double eps, const std::vector<int>& levels);

struct StabilityRow {
  double eps = 0.0;
  double rfem_min = 0.0, rfem_max = 0.0;
  double rfem_overshoot = 0.0, rfem_undershoot = 0.0;
  bool rfem_finite = false;
  double dg_min = 0.0, dg_max = 0.0;
  double dg_overshoot = 0.0, dg_undershoot = 0.0;
  bool dg_finite = false;
};

struct StabilityReport {
  int n = 0;
  std::vector<StabilityRow> rows;
};

/// Boundary-layer stability comparison for the constant wind: recovered
/// scheme versus upwind interior-penalty P1 dG on an n x n criss-cross mesh,
/// reporting nodal ranges and over/undershoot beyond the exact range [0, 1].
StabilityReport run_test4_stability(const std::vector<double>& eps_list, int n);

void write_stability_csv(const StabilityReport& report, const std::string& path);
std::string format_stability(const StabilityReport& report);

struct ConditionSeries {
  double alpha = 0.0;
  std::vector<int> levels;
  std::vector<int> ndofs;
  std::vector<double> kappa;
  double fitted_exponent = 0.0;  ///< slope of log kappa against log ndof
};

struct SparsitySummary {
  std::string label;
  int size = 0;
  long long nnz = 0;
  int bandwidth = 0;
};

struct ConditionReport {
  std::vector<ConditionSeries> series;
  std::vector<SparsitySummary> sparsity;  ///< recovered, conforming, interior-penalty matrices
  int sparsity_n = 8;
};

/// Condition numbers of the recovered system (r=0, s=1) across mesh levels
/// for each penalty exponent alpha, with a log-log growth fit, plus a
/// sparsity comparison of the assembled operators on the n=8 mesh.
ConditionReport run_condition(const std::vector<double>& alphas, const std::vector<int>& levels,
                              double c_sigma = 1.0, int sparsity_n = 8);

std::string format_condition(const ConditionReport& report);

}  // namespace rfem
