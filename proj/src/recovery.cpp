#include "rfem/recovery.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/SVD>

namespace rfem {

Eigen::MatrixXd transition_matrix(int r, int s) {
  if (r < 0 || s < r || s > 3) throw std::invalid_argument("transition_matrix: need 0 <= r <= s <= 3");
  const LocalBasis& source = local_basis(r);
  const LocalBasis& target = local_basis(s);
  Eigen::MatrixXd T(source.ldof, target.ldof);
  Eigen::VectorXd vals;
  for (int j = 0; j < target.ldof; ++j) {
    source.eval(target.nodes[j], vals);
    T.col(j) = vals;
  }
  return T;
}

RecoveryOp build_recovery(const FeSpace& dg, const FeSpace& cg) {
  if (dg.mesh != cg.mesh) throw std::invalid_argument("build_recovery: spaces live on different meshes");
  if (dg.kind != SpaceKind::DG || cg.kind != SpaceKind::CG)
    throw std::invalid_argument("build_recovery: expected a DG source and a CG target");
  if (dg.degree > cg.degree)
    throw std::invalid_argument("build_recovery: target degree must be at least the source degree");

  const Mesh& mesh = *dg.mesh;
  const Eigen::MatrixXd T = transition_matrix(dg.degree, cg.degree);

  // |omega_nu|: number of elements owning each target node.
  std::vector<int> patch_size(cg.ndof, 0);
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int j = 0; j < cg.ldof; ++j) ++patch_size[cg.dof(e, j)];

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.num_elements()) * cg.ldof * dg.ldof);
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int j = 0; j < cg.ldof; ++j) {
      const int nu = cg.dof(e, j);
      if (cg.boundary_dof[nu]) continue;
      const double scale = 1.0 / patch_size[nu];
      for (int i = 0; i < dg.ldof; ++i) {
        const double val = T(i, j);
        // Exact zeros of the transition matrix carry inversion noise; the
        // smallest genuine entries are O(1e-2).
        if (std::abs(val) > 1e-13) trips.emplace_back(nu, dg.dof(e, i), scale * val);
      }
    }

  RecoveryOp op;
  op.source = &dg;
  op.target = &cg;
  op.E.resize(cg.ndof, dg.ndof);
  op.E.setFromTriplets(trips.begin(), trips.end());
  op.E.makeCompressed();
  return op;
}

RecoveryOp identity_recovery(const FeSpace& dg) {
  if (dg.kind != SpaceKind::DG) throw std::invalid_argument("identity_recovery: DG space required");
  RecoveryOp op;
  op.source = &dg;
  op.target = &dg;
  op.E.resize(dg.ndof, dg.ndof);
  op.E.setIdentity();
  return op;
}

FeFunction recover(const RecoveryOp& op, const FeFunction& dg_fn) {
  if (dg_fn.space != op.source) throw std::invalid_argument("recover: function not on the source space");
  FeFunction out;
  out.space = op.target;
  out.coef = op.E * dg_fn.coef;
  return out;
}

int recovery_rank(const RecoveryOp& op) {
  if (op.E.cols() > 5000)
    throw std::invalid_argument("recovery_rank: dense SVD refused above 5000 columns");
  Eigen::MatrixXd dense = Eigen::MatrixXd(op.E);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double cutoff = 1e-10 * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) rank += sv(i) > cutoff;
  return rank;
}

double kp_ratio(const RecoveryOp& op, const FeFunction& v, int alpha) {
  if (alpha != 0 && alpha != 1) throw std::invalid_argument("kp_ratio: alpha must be 0 or 1");
  if (v.space != op.source) throw std::invalid_argument("kp_ratio: function not on the source space");
  const FeSpace& dg = *op.source;
  const Mesh& mesh = *dg.mesh;
  FeFunction rec = recover(op, v);

  // Numerator: broken | v - Ev |^2 in L2 (alpha = 0) or H1 seminorm (alpha = 1).
  const int qd = std::max(2 * op.target->degree, 1);
  const QuadRule& rule = tri_rule(qd);
  double num = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = 2.0 * mesh.area(e);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2& p = rule.points[q];
      if (alpha == 0) {
        const double d = v.eval(e, p) - rec.eval(e, p);
        num += rule.weights[q] * jac * d * d;
      } else {
        num += rule.weights[q] * jac * (v.grad(e, p) - rec.grad(e, p)).squaredNorm();
      }
    }
  }

  // Scale for the 0/0 guard: jump energy at rounding level relative to the
  // function's own L2 mass counts as zero.
  double vmass = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = 2.0 * mesh.area(e);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double val = v.eval(e, rule.points[q]);
      vmass += rule.weights[q] * jac * val * val;
    }
  }

  // Denominator: || h^(1/2-alpha) [v] ||^2 over all facets.
  const QuadRule& erule = edge_rule(std::max(2 * dg.degree, 1));
  double den = 0;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& fa = mesh.facet(f);
    const double hpow = std::pow(mesh.facet_h(f), 1.0 - 2.0 * alpha);
    const Vec2 a = mesh.vertex(fa.verts[0]), b = mesh.vertex(fa.verts[1]);
    for (size_t q = 0; q < erule.points.size(); ++q) {
      const Vec2 x = a + erule.points[q].x() * (b - a);
      double jump = v.eval(fa.elems[0], mesh.map_to_reference(fa.elems[0], x));
      if (!fa.is_boundary) jump -= v.eval(fa.elems[1], mesh.map_to_reference(fa.elems[1], x));
      den += erule.weights[q] * fa.length * hpow * jump * jump;
    }
  }

  if (den <= 1e-24 * vmass) return 0.0;
  return num / den;
}

}  // namespace rfem
