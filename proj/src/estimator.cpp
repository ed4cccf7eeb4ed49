#include "rfem/estimator.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace rfem {

ErrorIndicators compute_indicators(const RecoveryOp& op, const FeFunction& cg_fn,
                                   const FeFunction& dg_fn, const ScalarField& f,
                                   const MatrixField& A, bool a_constant, const StabSpec& stab) {
  const FeSpace& tgt = *op.target;
  if (cg_fn.space != &tgt || dg_fn.space != op.source)
    throw std::invalid_argument("compute_indicators: functions do not match the recovery spaces");
  const Mesh& mesh = *tgt.mesh;
  const int nelem = mesh.num_elements();
  const int s = tgt.degree;

  // element-wise projected diffusion tensor (degree s-1), unless constant
  const int adeg = std::max(0, s - 1);
  FeSpace dga;
  std::array<FeFunction, 4> pa;
  if (!a_constant) {
    dga = build_space(mesh, SpaceKind::DG, adeg);
    for (int k = 0; k < 4; ++k) {
      const int ri = k / 2, ci = k % 2;
      pa[k] = l2_project(dga, [&A, ri, ci](const Vec2& x) { return A(x)(ri, ci); });
    }
  }
  const auto proj_A = [&](int e, const Vec2& ref, const Vec2& x) {
    if (a_constant) return A(x);
    Eigen::Matrix2d m;
    m << pa[0].eval(e, ref), pa[1].eval(e, ref), pa[2].eval(e, ref), pa[3].eval(e, ref);
    return m;
  };

  // exact discontinuous representation of the flux Pi_A grad(E u_h)
  const int qdeg = a_constant ? adeg : 2 * adeg;
  if (qdeg > 3)
    throw std::invalid_argument("compute_indicators: flux degree beyond cubic is unsupported");
  const FeSpace dgq = build_space(mesh, SpaceKind::DG, qdeg);
  const LocalBasis& qbasis = local_basis(qdeg);
  FeFunction q1{&dgq, Eigen::VectorXd(dgq.ndof)};
  FeFunction q2{&dgq, Eigen::VectorXd(dgq.ndof)};
  for (int e = 0; e < nelem; ++e)
    for (int i = 0; i < dgq.ldof; ++i) {
      const Vec2& ref = qbasis.nodes[i];
      const Vec2 q = proj_A(e, ref, mesh.map_to_physical(e, ref)) * cg_fn.grad(e, ref);
      q1.coef(dgq.dof(e, i)) = q.x();
      q2.coef(dgq.dof(e, i)) = q.y();
    }

  ErrorIndicators ind;
  ind.eta.assign(nelem, 0.0);
  ind.eta_A.assign(nelem, 0.0);
  std::vector<double> eta_sq(nelem, 0.0);

  const QuadRule& vrule = tri_rule(std::max(2 * s + 2, 6));
  for (int e = 0; e < nelem; ++e) {
    double acc = 0.0;
    double acc_a = 0.0;
    for (size_t q = 0; q < vrule.points.size(); ++q) {
      const Vec2& ref = vrule.points[q];
      const Vec2 x = mesh.map_to_physical(e, ref);
      const double divq = q1.grad(e, ref).x() + q2.grad(e, ref).y();
      const double r = f(x) + divq;
      acc += vrule.weights[q] * r * r;
      if (!a_constant) {
        const Vec2 d = (A(x) - proj_A(e, ref, x)) * cg_fn.grad(e, ref);
        acc_a += vrule.weights[q] * d.squaredNorm();
      }
    }
    const double jac = 2.0 * mesh.area(e);
    const double h = mesh.elem_diameter(e);
    eta_sq[e] = h * h * jac * acc;
    ind.eta_A[e] = std::sqrt(jac * acc_a);
  }

  // interior facet flux jumps, half to each adjacent element
  const QuadRule& frule = edge_rule(std::max(1, 2 * qdeg + 2));
  for (int fct = 0; fct < mesh.num_facets(); ++fct) {
    const Facet& F = mesh.facet(fct);
    if (F.is_boundary) continue;
    const Vec2 pa0 = mesh.vertex(F.verts[0]);
    const Vec2 pb = mesh.vertex(F.verts[1]);
    double acc = 0.0;
    for (size_t q = 0; q < frule.points.size(); ++q) {
      const Vec2 x = pa0 + frule.points[q].x() * (pb - pa0);
      const Vec2 r0 = mesh.map_to_reference(F.elems[0], x);
      const Vec2 r1 = mesh.map_to_reference(F.elems[1], x);
      const Vec2 dq(q1.eval(F.elems[0], r0) - q1.eval(F.elems[1], r1),
                    q2.eval(F.elems[0], r0) - q2.eval(F.elems[1], r1));
      const double jmp = dq.dot(F.normal);
      acc += frule.weights[q] * jmp * jmp;
    }
    const double contrib = 0.5 * mesh.facet_h(fct) * F.length * acc;
    eta_sq[F.elems[0]] += contrib;
    eta_sq[F.elems[1]] += contrib;
  }
  for (int e = 0; e < nelem; ++e) ind.eta[e] = std::sqrt(eta_sq[e]);

  ind.stab = stab_local_energy(op, stab, A, dg_fn);
  double total_sq = 0.0;
  for (int e = 0; e < nelem; ++e) {
    ind.stab[e] *= std::pow(mesh.elem_diameter(e), 2.0 * stab.alpha);
    total_sq += eta_sq[e] + ind.stab[e] + ind.eta_A[e] * ind.eta_A[e];
  }
  ind.total = std::sqrt(total_sq);
  return ind;
}

std::vector<double> marking_indicators(const ErrorIndicators& ind) {
  std::vector<double> m(ind.eta.size());
  for (size_t e = 0; e < m.size(); ++e)
    m[e] = std::sqrt(ind.eta[e] * ind.eta[e] + ind.stab[e] + ind.eta_A[e] * ind.eta_A[e]);
  return m;
}

double effectivity(const ErrorIndicators& ind, double true_h1_error) {
  if (!(true_h1_error > 0.0))
    throw std::invalid_argument("effectivity: true error must be positive");
  return ind.total / true_h1_error;
}

std::vector<double> lower_bound_ratio(const ErrorIndicators& ind, const FeFunction& cg_fn,
                                      const ProblemSpec& prob) {
  if (!prob.exact_grad)
    throw std::invalid_argument("lower_bound_ratio: needs the exact gradient");
  const FeSpace& cg = *cg_fn.space;
  const Mesh& mesh = *cg.mesh;
  const int nelem = mesh.num_elements();

  std::vector<double> energy(nelem, 0.0);
  const QuadRule& rule = tri_rule(std::max(2 * cg.degree + 2, 6));
  for (int e = 0; e < nelem; ++e) {
    double acc = 0.0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2& ref = rule.points[q];
      const Vec2 x = mesh.map_to_physical(e, ref);
      const Vec2 d = prob.exact_grad(x) - cg_fn.grad(e, ref);
      acc += rule.weights[q] * d.dot(prob.A(x) * d);
    }
    energy[e] = 2.0 * mesh.area(e) * acc;
  }

  std::vector<double> ratio(nelem, 0.0);
  for (int e = 0; e < nelem; ++e) {
    double patch = energy[e];
    for (int fct : mesh.elem_facets(e)) {
      const Facet& F = mesh.facet(fct);
      const int nb = (F.elems[0] == e) ? F.elems[1] : F.elems[0];
      if (nb >= 0) patch += energy[nb];
    }
    const double num = ind.eta[e] * ind.eta[e];
    const double den = patch + ind.eta_A[e] * ind.eta_A[e];
    if (num > 0.0) ratio[e] = num / std::max(den, 1e-300);
  }
  return ratio;
}

void write_indicators_csv(const ErrorIndicators& ind, const std::vector<double>& patch_ratio,
                          const std::string& path) {
  if (!patch_ratio.empty() && patch_ratio.size() != ind.eta.size())
    throw std::invalid_argument("write_indicators_csv: ratio size mismatch");
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) throw std::runtime_error("write_indicators_csv: cannot open " + path);
  std::fprintf(out, "elem,eta,eta_A,stab,patch_ratio\n");
  for (size_t e = 0; e < ind.eta.size(); ++e) {
    const double pr = patch_ratio.empty() ? std::nan("") : patch_ratio[e];
    std::fprintf(out, "%zu,%.17g,%.17g,%.17g,%.17g\n", e, ind.eta[e], ind.eta_A[e], ind.stab[e],
                 pr);
  }
  std::fclose(out);
}

}  // namespace rfem
