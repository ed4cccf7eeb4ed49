#include "rfem/adapt.hpp"

#include <cstdio>
#include <stdexcept>

#include "rfem/recovery.hpp"

namespace rfem {

std::vector<int> mark_maximum(const std::vector<double>& eta, double theta) {
  if (eta.empty()) throw std::invalid_argument("mark_maximum: empty indicator list");
  if (!(theta > 0.0) || theta > 1.0)
    throw std::invalid_argument("mark_maximum: theta must be in (0,1]");
  double mx = 0.0;
  for (double v : eta) mx = std::max(mx, v);
  const double threshold = theta * mx;
  std::vector<int> marked;
  for (size_t e = 0; e < eta.size(); ++e)
    if (eta[e] >= threshold) marked.push_back(static_cast<int>(e));
  return marked;
}

AdaptOutcome adapt_loop(const Mesh& initial, const ProblemSpec& prob, const StabSpec& stab,
                        const AdaptOptions& opt) {
  if (opt.max_iter < 1) throw std::invalid_argument("adapt_loop: max_iter must be positive");
  std::vector<AdaptRecord> records;
  Mesh mesh = initial;
  std::string failure;

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    const FeSpace dg = build_space(mesh, SpaceKind::DG, opt.r);
    const FeSpace cg = build_space(mesh, SpaceKind::CG, opt.s);
    const RecoveryOp op = build_recovery(dg, cg);

    Eigen::VectorXd u;
    try {
      u = solve(build_rfem_system(op, prob, stab));
    } catch (const std::exception& e) {
      failure = e.what();
      break;
    }
    const FeFunction uh{&dg, std::move(u)};
    const FeFunction ru = recover(op, uh);
    const ErrorIndicators ind =
        compute_indicators(op, ru, uh, prob.f, prob.A, prob.a_constant, stab);

    AdaptRecord rec;
    rec.iter = iter;
    rec.ndof = dg.ndof;
    rec.interior_cg = cg.num_interior_dofs();
    rec.estimator = ind.total;
    rec.nelems = mesh.num_elements();
    if (prob.exact && prob.exact_grad) {
      rec.error = error_norms(ru, prob.exact, prob.exact_grad).h1_semi;
      if (rec.error > 0.0) rec.effectivity = ind.total / rec.error;
    }
    records.push_back(rec);

    if (ind.total < opt.tol || iter + 1 == opt.max_iter) break;
    mesh = refine(mesh, mark_maximum(marking_indicators(ind), opt.theta));
  }
  return AdaptOutcome{std::move(records), std::move(mesh), std::move(failure)};
}

void write_adapt_csv(const std::vector<AdaptRecord>& records, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("write_adapt_csv: cannot open " + path);
  std::fprintf(out, "iter,ndof,error,estimator,effectivity,nelems\n");
  for (const AdaptRecord& r : records)
    std::fprintf(out, "%d,%d,%.17g,%.17g,%.17g,%d\n", r.iter, r.ndof, r.error, r.estimator,
                 r.effectivity, r.nelems);
  std::fclose(out);
}

}  // namespace rfem
