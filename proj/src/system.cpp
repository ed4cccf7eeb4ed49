#include "rfem/system.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace rfem {

LinearSystem build_rfem_system(const RecoveryOp& op, const ProblemSpec& prob,
                               const StabSpec& stab) {
  const FeSpace& src = *op.source;
  const FeSpace& tgt = *op.target;
  if (src.mesh != tgt.mesh)
    throw std::invalid_argument("build_rfem_system: spaces live on different meshes");
  const Mesh& mesh = *src.mesh;
  const std::vector<double> scale = diffusion_scale(mesh, prob.A);

  LinearSystem sys;
  if (stab.kind == StabKind::DgInteriorPenalty) {
    if (op.source != op.target)
      throw std::invalid_argument(
          "build_rfem_system: interior-penalty stabilisation needs the identity recovery");
    const auto sigma = facet_sigma(mesh, stab, scale);
    sys.A = assemble_stiffness(src, prob.A) + assemble_dg_stab(src, prob.A, sigma, stab.theta);
    sys.symmetric = stab.theta == 1.0;
  } else {
    const SpMat K = assemble_stiffness(tgt, prob.A);
    const SpMat KE = K * op.E;
    const SpMat EKE = SpMat(op.E.transpose()) * KE;
    if (stab.kind == StabKind::FacetJump)
      sys.A = EKE + assemble_jump_penalty(src, facet_sigma(mesh, stab, scale));
    else
      sys.A = EKE + assemble_volume_stab(op, element_sigma_tilde(mesh, stab, scale));
    sys.symmetric = true;
  }
  sys.rhs = rfem_rhs(op, assemble_load(tgt, prob.f));

  if (prob.has_convection()) {
    sys.A = sys.A + assemble_upwind(src, prob.w);
    sys.symmetric = false;
  }
  if (prob.has_reaction()) sys.A = sys.A + assemble_mass(src, prob.c);
  sys.A.makeCompressed();
  return sys;
}

LinearSystem build_fem_system(const FeSpace& cg, const ProblemSpec& prob) {
  if (cg.kind != SpaceKind::CG)
    throw std::invalid_argument("build_fem_system: needs a conforming space");
  if (prob.has_convection())
    throw std::invalid_argument("build_fem_system: diffusion(-reaction) problems only");

  SpMat K = assemble_stiffness(cg, prob.A);
  if (prob.has_reaction()) K = K + assemble_mass(cg, prob.c);
  const Eigen::VectorXd b = assemble_load(cg, prob.f);

  LinearSystem sys;
  std::vector<int> reduced(cg.ndof, -1);
  for (int i = 0; i < cg.ndof; ++i)
    if (!cg.boundary_dof[i]) {
      reduced[i] = static_cast<int>(sys.dofs.size());
      sys.dofs.push_back(i);
    }
  const int m = static_cast<int>(sys.dofs.size());

  std::vector<Triplet> trips;
  trips.reserve(K.nonZeros());
  for (int k = 0; k < K.outerSize(); ++k)
    for (SpMat::InnerIterator it(K, k); it; ++it)
      if (reduced[it.row()] >= 0 && reduced[it.col()] >= 0)
        trips.emplace_back(reduced[it.row()], reduced[it.col()], it.value());
  sys.A.resize(m, m);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.A.makeCompressed();
  sys.rhs.resize(m);
  for (int i = 0; i < m; ++i) sys.rhs(i) = b(sys.dofs[i]);
  sys.symmetric = true;
  return sys;
}

LinearSystem build_ipdg_system(const FeSpace& dg, const ProblemSpec& prob, const StabSpec& stab) {
  const Mesh& mesh = *dg.mesh;
  const auto sigma = facet_sigma(mesh, stab, diffusion_scale(mesh, prob.A));
  LinearSystem sys;
  sys.A = assemble_ip_dg(dg, prob.A, sigma, stab.theta);
  sys.symmetric = stab.theta == 1.0;
  sys.rhs = assemble_load(dg, prob.f);
  if (prob.has_convection()) {
    sys.A = sys.A + assemble_upwind(dg, prob.w);
    sys.symmetric = false;
  }
  if (prob.has_reaction()) sys.A = sys.A + assemble_mass(dg, prob.c);
  sys.A.makeCompressed();
  return sys;
}

Eigen::VectorXd solve(const LinearSystem& sys) {
  const int n = static_cast<int>(sys.A.rows());
  if (sys.rhs.size() != n) throw std::invalid_argument("solve: rhs size mismatch");

  Eigen::VectorXd u;
  if (n < 200000) {
    if (sys.symmetric) {
      Eigen::SimplicialLDLT<SpMat> fac(sys.A);
      if (fac.info() != Eigen::Success) throw std::runtime_error("solve: LDLT factorization failed");
      u = fac.solve(sys.rhs);
    } else {
      Eigen::SparseLU<SpMat> fac(sys.A);
      if (fac.info() != Eigen::Success) throw std::runtime_error("solve: LU factorization failed");
      u = fac.solve(sys.rhs);
    }
  } else {
    if (sys.symmetric) {
      Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper,
                               Eigen::IncompleteCholesky<double>>
          it(sys.A);
      it.setTolerance(1e-12);
      it.setMaxIterations(20000);
      u = it.solve(sys.rhs);
    } else {
      Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> it(sys.A);
      it.setTolerance(1e-12);
      it.setMaxIterations(20000);
      u = it.solve(sys.rhs);
    }
  }

  const double scale = std::max(sys.rhs.norm(), std::numeric_limits<double>::min());
  const double rel = (sys.A * u - sys.rhs).norm() / scale;
  if (!(rel < 1e-10))
    throw std::runtime_error("solve: relative residual " + std::to_string(rel) +
                             " above tolerance 1e-10");
  return u;
}

FeFunction solution_function(const FeSpace& space, const LinearSystem& sys,
                             const Eigen::VectorXd& u) {
  FeFunction fn{&space, Eigen::VectorXd::Zero(space.ndof)};
  if (sys.dofs.empty()) {
    if (u.size() != space.ndof) throw std::invalid_argument("solution_function: size mismatch");
    fn.coef = u;
  } else {
    if (u.size() != static_cast<Eigen::Index>(sys.dofs.size()))
      throw std::invalid_argument("solution_function: size mismatch");
    for (size_t i = 0; i < sys.dofs.size(); ++i) fn.coef(sys.dofs[i]) = u(i);
  }
  return fn;
}

namespace {

double dominant_eigenvalue(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply,
                           int n, int max_iter, const char* what) {
  std::mt19937 rng(987u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  v.normalize();
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd w = apply(v);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    const double lambda = v.dot(w);
    v = w / norm;
    if (it > 0 && std::abs(lambda - prev) <= 1e-6 * std::abs(lambda)) return lambda;
    prev = lambda;
  }
  throw std::runtime_error(std::string("condition_estimate: ") + what +
                           " did not converge within the iteration cap");
}

}  // namespace

double condition_estimate(const SpMat& A, int max_iter) {
  if (A.rows() != A.cols()) throw std::invalid_argument("condition_estimate: square matrix needed");
  const int n = static_cast<int>(A.rows());
  const double lmax = dominant_eigenvalue(
      [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(A * v); }, n, max_iter,
      "power iteration");

  Eigen::SimplicialLDLT<SpMat> fac(A);
  if (fac.info() != Eigen::Success)
    throw std::runtime_error("condition_estimate: factorization failed");
  const double inv_lmax = dominant_eigenvalue(
      [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(fac.solve(v)); }, n, max_iter,
      "inverse iteration");
  if (!(inv_lmax > 0.0) || !std::isfinite(inv_lmax) || !std::isfinite(lmax))
    throw std::runtime_error("condition_estimate: matrix is not positive definite");
  return lmax * inv_lmax;
}

double fem_equivalence_gap(const RecoveryOp& op, const ProblemSpec& prob, const StabSpec& stab) {
  const LinearSystem rfem = build_rfem_system(op, prob, stab);
  const Eigen::VectorXd u_rfem = solve(rfem);
  const Eigen::VectorXd conf = op.E * u_rfem;

  const LinearSystem fem = build_fem_system(*op.target, prob);
  const FeFunction u_fem = solution_function(*op.target, fem, solve(fem));
  return (conf - u_fem.coef).cwiseAbs().maxCoeff();
}

double dg_equivalence_gap(const FeSpace& dg, const ProblemSpec& prob, const StabSpec& stab) {
  const RecoveryOp op = identity_recovery(dg);
  const LinearSystem a = build_rfem_system(op, prob, stab);
  const LinearSystem b = build_ipdg_system(dg, prob, stab);
  double gap = 0.0;
  const SpMat diff = a.A - b.A;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it) gap = std::max(gap, std::abs(it.value()));
  gap = std::max(gap, (a.rhs - b.rhs).cwiseAbs().maxCoeff());
  return gap;
}

}  // namespace rfem
