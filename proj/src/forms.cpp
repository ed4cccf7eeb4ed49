#include "rfem/forms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace rfem {

std::vector<double> diffusion_scale(const Mesh& mesh, const MatrixField& A) {
  std::vector<double> scale(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.tri(e);
    const Vec2 c = (mesh.vertex(t[0]) + mesh.vertex(t[1]) + mesh.vertex(t[2])) / 3.0;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(A(c));
    scale[e] = svd.singularValues()(0);
  }
  return scale;
}

std::vector<double> facet_sigma(const Mesh& mesh, const StabSpec& stab,
                                const std::vector<double>& scale) {
  if (static_cast<int>(scale.size()) != mesh.num_elements())
    throw std::invalid_argument("facet_sigma: scale has wrong size");
  std::vector<double> sigma(mesh.num_facets());
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& F = mesh.facet(f);
    double a = scale[F.elems[0]];
    if (F.elems[1] >= 0) a = std::max(a, scale[F.elems[1]]);
    sigma[f] = stab.c_sigma * a * std::pow(mesh.facet_h(f), 2.0 * stab.alpha - 1.0);
  }
  return sigma;
}

std::vector<double> element_sigma_tilde(const Mesh& mesh, const StabSpec& stab,
                                        const std::vector<double>& scale) {
  if (static_cast<int>(scale.size()) != mesh.num_elements())
    throw std::invalid_argument("element_sigma_tilde: scale has wrong size");
  std::vector<double> st(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e)
    st[e] = stab.c_sigma * scale[e] * std::pow(mesh.elem_diameter(e), 2.0 * stab.alpha - 2.0);
  return st;
}

namespace {

SpMat from_triplets(int rows, int cols, std::vector<Triplet>& trips) {
  SpMat m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

}  // namespace

SpMat assemble_stiffness(const FeSpace& space, const MatrixField& A) {
  const Mesh& mesh = *space.mesh;
  const int ld = space.ldof;
  const QuadRule& rule = tri_rule(std::max(1, 2 * (space.degree - 1) + 2));
  const Tabulation& tab = tabulate(space.degree, rule);
  const int nq = static_cast<int>(rule.points.size());

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.num_elements()) * ld * ld);
  Eigen::MatrixXd local(ld, ld);
  Eigen::MatrixXd g(2, ld), Ag(2, ld);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::Matrix2d J = mesh.jacobian(e);
    const Eigen::Matrix2d Jinv_t = J.inverse().transpose();
    const double detJ = std::abs(J.determinant());
    local.setZero();
    for (int q = 0; q < nq; ++q) {
      g.row(0) = tab.grad_x.row(q);
      g.row(1) = tab.grad_y.row(q);
      g = Jinv_t * g;
      const Vec2 x = mesh.map_to_physical(e, rule.points[q]);
      Ag.noalias() = A(x) * g;
      local.noalias() += (rule.weights[q] * detJ) * g.transpose() * Ag;
    }
    for (int i = 0; i < ld; ++i)
      for (int j = 0; j < ld; ++j)
        trips.emplace_back(space.dof(e, i), space.dof(e, j), local(i, j));
  }
  return from_triplets(space.ndof, space.ndof, trips);
}

SpMat assemble_jump_penalty(const FeSpace& dg, const std::vector<double>& sigma) {
  const Mesh& mesh = *dg.mesh;
  if (static_cast<int>(sigma.size()) != mesh.num_facets())
    throw std::invalid_argument("assemble_jump_penalty: sigma has wrong size");
  const LocalBasis& basis = local_basis(dg.degree);
  const QuadRule& rule = edge_rule(std::max(1, 2 * dg.degree));
  const int ld = dg.ldof;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.num_facets()) * 4 * ld * ld);
  Eigen::VectorXd vals(ld);
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& F = mesh.facet(f);
    if (sigma[f] == 0.0) continue;
    const int sides = F.is_boundary ? 1 : 2;
    const Vec2 pa = mesh.vertex(F.verts[0]);
    const Vec2 pb = mesh.vertex(F.verts[1]);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(sides * ld, sides * ld);
    Eigen::VectorXd jump(sides * ld);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = pa + rule.points[q].x() * (pb - pa);
      for (int k = 0; k < sides; ++k) {
        const double sign = (k == 0) ? 1.0 : -1.0;
        basis.eval(mesh.map_to_reference(F.elems[k], x), vals);
        jump.segment(k * ld, ld) = sign * vals;
      }
      local.noalias() += (sigma[f] * rule.weights[q] * F.length) * jump * jump.transpose();
    }
    for (int ki = 0; ki < sides; ++ki)
      for (int kj = 0; kj < sides; ++kj)
        for (int i = 0; i < ld; ++i)
          for (int j = 0; j < ld; ++j)
            trips.emplace_back(dg.dof(F.elems[ki], i), dg.dof(F.elems[kj], j),
                               local(ki * ld + i, kj * ld + j));
  }
  return from_triplets(dg.ndof, dg.ndof, trips);
}

SpMat assemble_volume_stab(const RecoveryOp& op, const std::vector<double>& sigma_tilde) {
  const FeSpace& src = *op.source;
  const FeSpace& tgt = *op.target;
  const Mesh& mesh = *src.mesh;
  if (static_cast<int>(sigma_tilde.size()) != mesh.num_elements())
    throw std::invalid_argument("assemble_volume_stab: sigma_tilde has wrong size");

  // Represent w - Ew in the discontinuous space of the target degree: R embeds
  // the source, G scatters the conforming coefficients element by element.
  const FeSpace dgs = build_space(mesh, SpaceKind::DG, tgt.degree);
  const Eigen::MatrixXd T = transition_matrix(src.degree, tgt.degree);
  std::vector<Triplet> rt, gt;
  rt.reserve(static_cast<size_t>(mesh.num_elements()) * src.ldof * dgs.ldof);
  gt.reserve(static_cast<size_t>(mesh.num_elements()) * dgs.ldof);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int i = 0; i < src.ldof; ++i)
      for (int j = 0; j < dgs.ldof; ++j)
        if (std::abs(T(i, j)) > 1e-13) rt.emplace_back(dgs.dof(e, j), src.dof(e, i), T(i, j));
    for (int j = 0; j < dgs.ldof; ++j) gt.emplace_back(dgs.dof(e, j), tgt.dof(e, j), 1.0);
  }
  const SpMat R = from_triplets(dgs.ndof, src.ndof, rt);
  const SpMat G = from_triplets(dgs.ndof, tgt.ndof, gt);
  const SpMat D = R - SpMat(G * op.E);

  const QuadRule& rule = tri_rule(std::max(1, 2 * dgs.degree));
  const Tabulation& tab = tabulate(dgs.degree, rule);
  std::vector<Triplet> mt;
  mt.reserve(static_cast<size_t>(mesh.num_elements()) * dgs.ldof * dgs.ldof);
  Eigen::MatrixXd local(dgs.ldof, dgs.ldof);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    local.setZero();
    const double scale = sigma_tilde[e] * 2.0 * mesh.area(e);
    for (size_t q = 0; q < rule.points.size(); ++q)
      local.noalias() += (scale * rule.weights[q]) * tab.values.row(q).transpose() * tab.values.row(q);
    for (int i = 0; i < dgs.ldof; ++i)
      for (int j = 0; j < dgs.ldof; ++j)
        mt.emplace_back(dgs.dof(e, i), dgs.dof(e, j), local(i, j));
  }
  const SpMat M = from_triplets(dgs.ndof, dgs.ndof, mt);

  const SpMat MD = M * D;
  SpMat S = SpMat(D.transpose()) * MD;
  S.makeCompressed();
  return S;
}

SpMat assemble_dg_stab(const FeSpace& dg, const MatrixField& A, const std::vector<double>& sigma,
                       double theta) {
  const Mesh& mesh = *dg.mesh;
  if (static_cast<int>(sigma.size()) != mesh.num_facets())
    throw std::invalid_argument("assemble_dg_stab: sigma has wrong size");
  const QuadRule& rule = edge_rule(std::max(1, 2 * dg.degree + 2));
  const int ld = dg.ldof;

  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.num_facets()) * 4 * ld * ld);
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& F = mesh.facet(f);
    const int sides = F.is_boundary ? 1 : 2;
    const double avg = F.is_boundary ? 1.0 : 0.5;
    const Vec2 pa = mesh.vertex(F.verts[0]);
    const Vec2 pb = mesh.vertex(F.verts[1]);
    Eigen::MatrixXd local = Eigen::MatrixXd::Zero(sides * ld, sides * ld);
    Eigen::VectorXd jump(sides * ld), flux(sides * ld);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = pa + rule.points[q].x() * (pb - pa);
      const Eigen::Matrix2d Ax = A(x);
      for (int k = 0; k < sides; ++k) {
        const double sign = (k == 0) ? 1.0 : -1.0;
        const BasisEval be = eval_basis(dg, F.elems[k], mesh.map_to_reference(F.elems[k], x));
        jump.segment(k * ld, ld) = sign * be.values;
        flux.segment(k * ld, ld) = avg * (be.grads * Ax.transpose() * F.normal);
      }
      const double w = rule.weights[q] * F.length;
      local.noalias() += (w * sigma[f]) * jump * jump.transpose();
      local.noalias() -= w * jump * flux.transpose();
      local.noalias() -= (w * theta) * flux * jump.transpose();
    }
    for (int ki = 0; ki < sides; ++ki)
      for (int kj = 0; kj < sides; ++kj)
        for (int i = 0; i < ld; ++i)
          for (int j = 0; j < ld; ++j)
            trips.emplace_back(dg.dof(F.elems[ki], i), dg.dof(F.elems[kj], j),
                               local(ki * ld + i, kj * ld + j));
  }
  return from_triplets(dg.ndof, dg.ndof, trips);
}

SpMat assemble_ip_dg(const FeSpace& dg, const MatrixField& A, const std::vector<double>& sigma,
                     double theta) {
  const Mesh& mesh = *dg.mesh;
  if (static_cast<int>(sigma.size()) != mesh.num_facets())
    throw std::invalid_argument("assemble_ip_dg: sigma has wrong size");
  const int ld = dg.ldof;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.num_elements() + 4 * mesh.num_facets()) * ld * ld);

  const QuadRule& vr = tri_rule(std::max(1, 2 * (dg.degree - 1) + 2));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = 2.0 * mesh.area(e);
    for (size_t q = 0; q < vr.points.size(); ++q) {
      const BasisEval be = eval_basis(dg, e, vr.points[q]);
      const Eigen::Matrix2d Ax = A(mesh.map_to_physical(e, vr.points[q]));
      const double w = vr.weights[q] * jac;
      for (int i = 0; i < ld; ++i) {
        const Vec2 gi(be.grads(i, 0), be.grads(i, 1));
        for (int j = 0; j < ld; ++j) {
          const Vec2 gj(be.grads(j, 0), be.grads(j, 1));
          trips.emplace_back(dg.dof(e, i), dg.dof(e, j), w * gi.dot(Ax * gj));
        }
      }
    }
  }

  const QuadRule& fr = edge_rule(std::max(1, 2 * dg.degree + 2));
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& F = mesh.facet(f);
    const int sides = F.is_boundary ? 1 : 2;
    const double avg = F.is_boundary ? 1.0 : 0.5;
    const Vec2 pa = mesh.vertex(F.verts[0]);
    const Vec2 pb = mesh.vertex(F.verts[1]);
    for (size_t q = 0; q < fr.points.size(); ++q) {
      const Vec2 x = pa + fr.points[q].x() * (pb - pa);
      const double w = fr.weights[q] * F.length;
      const Eigen::Matrix2d Ax = A(x);
      std::array<BasisEval, 2> be;
      for (int k = 0; k < sides; ++k)
        be[k] = eval_basis(dg, F.elems[k], mesh.map_to_reference(F.elems[k], x));
      for (int ki = 0; ki < sides; ++ki) {
        const double si = (ki == 0) ? 1.0 : -1.0;
        for (int kj = 0; kj < sides; ++kj) {
          const double sj = (kj == 0) ? 1.0 : -1.0;
          for (int i = 0; i < ld; ++i) {
            const double ji = si * be[ki].values(i);
            const Vec2 gi(be[ki].grads(i, 0), be[ki].grads(i, 1));
            const double qi = avg * F.normal.dot(Ax * gi);
            for (int j = 0; j < ld; ++j) {
              const double jj = sj * be[kj].values(j);
              const Vec2 gj(be[kj].grads(j, 0), be[kj].grads(j, 1));
              const double qj = avg * F.normal.dot(Ax * gj);
              trips.emplace_back(dg.dof(F.elems[ki], i), dg.dof(F.elems[kj], j),
                                 w * (sigma[f] * ji * jj - ji * qj - theta * qi * jj));
            }
          }
        }
      }
    }
  }
  return from_triplets(dg.ndof, dg.ndof, trips);
}

SpMat assemble_upwind(const FeSpace& dg, const std::function<Vec2(const Vec2&)>& w) {
  const Mesh& mesh = *dg.mesh;
  const int ld = dg.ldof;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.num_elements() + 2 * mesh.num_facets()) * ld * ld);

  if (dg.degree > 0) {
    const QuadRule& vr = tri_rule(std::max(1, 2 * dg.degree + 2));
    const Tabulation& tab = tabulate(dg.degree, vr);
    Eigen::MatrixXd local(ld, ld);
    Eigen::MatrixXd g(2, ld);
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const Eigen::Matrix2d J = mesh.jacobian(e);
      const Eigen::Matrix2d Jinv_t = J.inverse().transpose();
      const double detJ = std::abs(J.determinant());
      local.setZero();
      for (size_t q = 0; q < vr.points.size(); ++q) {
        g.row(0) = tab.grad_x.row(q);
        g.row(1) = tab.grad_y.row(q);
        g = Jinv_t * g;
        const Vec2 wx = w(mesh.map_to_physical(e, vr.points[q]));
        // (w . grad u) v : row i test values, column j trial gradients
        local.noalias() += (vr.weights[q] * detJ) * tab.values.row(q).transpose() * (wx.transpose() * g);
      }
      for (int i = 0; i < ld; ++i)
        for (int j = 0; j < ld; ++j)
          trips.emplace_back(dg.dof(e, i), dg.dof(e, j), local(i, j));
    }
  }

  // Inflow facet terms: at each quadrature point the downwind element D is the
  // one the flow enters; the contribution is |w.n| (u_D - u_U) v_D, with u_U = 0
  // on boundary facets (inflow part of the boundary).
  const LocalBasis& basis = local_basis(dg.degree);
  const QuadRule& fr = edge_rule(2 * dg.degree + 4);
  Eigen::VectorXd vd(ld), vu(ld);
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& F = mesh.facet(f);
    const Vec2 pa = mesh.vertex(F.verts[0]);
    const Vec2 pb = mesh.vertex(F.verts[1]);
    for (size_t q = 0; q < fr.points.size(); ++q) {
      const Vec2 x = pa + fr.points[q].x() * (pb - pa);
      const double omega = w(x).dot(F.normal);
      if (omega == 0.0) continue;
      const double wq = fr.weights[q] * F.length * std::abs(omega);
      if (F.is_boundary) {
        if (omega < 0.0) {
          basis.eval(mesh.map_to_reference(F.elems[0], x), vd);
          for (int i = 0; i < ld; ++i)
            for (int j = 0; j < ld; ++j)
              trips.emplace_back(dg.dof(F.elems[0], i), dg.dof(F.elems[0], j), wq * vd(i) * vd(j));
        }
        continue;
      }
      const int down = omega < 0.0 ? F.elems[0] : F.elems[1];
      const int up = omega < 0.0 ? F.elems[1] : F.elems[0];
      basis.eval(mesh.map_to_reference(down, x), vd);
      basis.eval(mesh.map_to_reference(up, x), vu);
      for (int i = 0; i < ld; ++i)
        for (int j = 0; j < ld; ++j) {
          trips.emplace_back(dg.dof(down, i), dg.dof(down, j), wq * vd(i) * vd(j));
          trips.emplace_back(dg.dof(down, i), dg.dof(up, j), -wq * vd(i) * vu(j));
        }
    }
  }
  return from_triplets(dg.ndof, dg.ndof, trips);
}

SpMat assemble_mass(const FeSpace& space, const ScalarField& c) {
  const Mesh& mesh = *space.mesh;
  const int ld = space.ldof;
  const QuadRule& rule = tri_rule(std::max(1, 2 * space.degree + 2));
  const Tabulation& tab = tabulate(space.degree, rule);
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.num_elements()) * ld * ld);
  Eigen::MatrixXd local(ld, ld);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = 2.0 * mesh.area(e);
    local.setZero();
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double cx = c(mesh.map_to_physical(e, rule.points[q]));
      local.noalias() +=
          (rule.weights[q] * jac * cx) * tab.values.row(q).transpose() * tab.values.row(q);
    }
    for (int i = 0; i < ld; ++i)
      for (int j = 0; j < ld; ++j)
        trips.emplace_back(space.dof(e, i), space.dof(e, j), local(i, j));
  }
  return from_triplets(space.ndof, space.ndof, trips);
}

Eigen::VectorXd assemble_load(const FeSpace& space, const ScalarField& f, int quad_degree) {
  const Mesh& mesh = *space.mesh;
  if (quad_degree < 0) quad_degree = 2 * space.degree + 2;
  const QuadRule& rule = tri_rule(std::max(1, quad_degree));
  const Tabulation& tab = tabulate(space.degree, rule);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.ndof);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = 2.0 * mesh.area(e);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double fx = f(mesh.map_to_physical(e, rule.points[q]));
      const double wq = rule.weights[q] * jac * fx;
      for (int i = 0; i < space.ldof; ++i) b(space.dof(e, i)) += wq * tab.values(q, i);
    }
  }
  return b;
}

Eigen::VectorXd rfem_rhs(const RecoveryOp& op, const Eigen::VectorXd& load_target) {
  if (load_target.size() != op.target->ndof)
    throw std::invalid_argument("rfem_rhs: load vector does not match the target space");
  return op.E.transpose() * load_target;
}

std::vector<double> stab_local_energy(const RecoveryOp& op, const StabSpec& stab,
                                      const MatrixField& A, const FeFunction& u) {
  const FeSpace& src = *op.source;
  if (u.space != &src) throw std::invalid_argument("stab_local_energy: u not on the source space");
  const Mesh& mesh = *src.mesh;
  const std::vector<double> scale = diffusion_scale(mesh, A);
  std::vector<double> energy(mesh.num_elements(), 0.0);

  if (stab.kind == StabKind::VolumeResidual) {
    const std::vector<double> st = element_sigma_tilde(mesh, stab, scale);
    const FeFunction ru = recover(op, u);
    const QuadRule& rule = tri_rule(std::max(1, 2 * op.target->degree));
    for (int e = 0; e < mesh.num_elements(); ++e) {
      double acc = 0.0;
      for (size_t q = 0; q < rule.points.size(); ++q) {
        const double d = u.eval(e, rule.points[q]) - ru.eval(e, rule.points[q]);
        acc += rule.weights[q] * d * d;
      }
      energy[e] = st[e] * 2.0 * mesh.area(e) * acc;
    }
    return energy;
  }

  // Facet-jump energies (also the penalty part of the interior-penalty form),
  // halved between the two adjacent elements.
  const std::vector<double> sigma = facet_sigma(mesh, stab, scale);
  const QuadRule& rule = edge_rule(std::max(1, 2 * src.degree));
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const Facet& F = mesh.facet(f);
    const Vec2 pa = mesh.vertex(F.verts[0]);
    const Vec2 pb = mesh.vertex(F.verts[1]);
    double acc = 0.0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const Vec2 x = pa + rule.points[q].x() * (pb - pa);
      double jmp = u.eval(F.elems[0], mesh.map_to_reference(F.elems[0], x));
      if (!F.is_boundary) jmp -= u.eval(F.elems[1], mesh.map_to_reference(F.elems[1], x));
      acc += rule.weights[q] * jmp * jmp;
    }
    const double ef = sigma[f] * F.length * acc;
    if (F.is_boundary) {
      energy[F.elems[0]] += ef;
    } else {
      energy[F.elems[0]] += 0.5 * ef;
      energy[F.elems[1]] += 0.5 * ef;
    }
  }
  return energy;
}

}  // namespace rfem
