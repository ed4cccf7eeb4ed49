#include "rfem/fespace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include <Eigen/Dense>

namespace rfem {

namespace {

// Monomials x^p y^q with p+q <= d in a fixed order.
std::vector<std::pair<int, int>> monomials(int degree) {
  std::vector<std::pair<int, int>> out;
  for (int t = 0; t <= degree; ++t)
    for (int p = t; p >= 0; --p) out.emplace_back(p, t - p);
  return out;
}

std::vector<Vec2> reference_nodes(int degree) {
  if (degree == 0) return {Vec2(1.0 / 3.0, 1.0 / 3.0)};
  const std::array<Vec2, 3> v = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  std::vector<Vec2> nodes(v.begin(), v.end());
  for (int i = 0; i < 3; ++i) {
    const Vec2 a = v[(i + 1) % 3], b = v[(i + 2) % 3];
    for (int k = 1; k < degree; ++k) nodes.push_back(a + (double(k) / degree) * (b - a));
  }
  if (degree == 3) nodes.emplace_back(1.0 / 3.0, 1.0 / 3.0);
  return nodes;
}

LocalBasis build_local_basis(int degree) {
  LocalBasis basis;
  basis.degree = degree;
  basis.nodes = reference_nodes(degree);
  basis.ldof = static_cast<int>(basis.nodes.size());
  const auto mono = monomials(degree);
  if (static_cast<int>(mono.size()) != basis.ldof)
    throw std::logic_error("local basis: node count does not match dimension");
  Eigen::MatrixXd V(basis.ldof, basis.ldof);
  for (int k = 0; k < basis.ldof; ++k)
    for (int j = 0; j < basis.ldof; ++j)
      V(k, j) = std::pow(basis.nodes[k].x(), mono[j].first) *
                std::pow(basis.nodes[k].y(), mono[j].second);
  basis.coef = V.transpose().fullPivLu().inverse();
  return basis;
}

}  // namespace

void LocalBasis::eval(const Vec2& p, Eigen::VectorXd& values) const {
  const auto mono = monomials(degree);
  Eigen::VectorXd m(ldof);
  for (int j = 0; j < ldof; ++j)
    m(j) = std::pow(p.x(), mono[j].first) * std::pow(p.y(), mono[j].second);
  values = coef * m;
}

void LocalBasis::eval_grad(const Vec2& p, Eigen::MatrixXd& grads) const {
  const auto mono = monomials(degree);
  Eigen::MatrixXd dm(ldof, 2);
  for (int j = 0; j < ldof; ++j) {
    const int a = mono[j].first, b = mono[j].second;
    dm(j, 0) = a == 0 ? 0.0 : a * std::pow(p.x(), a - 1) * std::pow(p.y(), b);
    dm(j, 1) = b == 0 ? 0.0 : b * std::pow(p.x(), a) * std::pow(p.y(), b - 1);
  }
  grads = coef * dm;
}

const LocalBasis& local_basis(int degree) {
  if (degree < 0 || degree > 3) throw std::invalid_argument("local_basis: degree must be in 0..3");
  static std::map<int, LocalBasis> cache;
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, build_local_basis(degree)).first;
  return it->second;
}

const Tabulation& tabulate(int degree, const QuadRule& rule) {
  static std::map<std::pair<int, const QuadRule*>, Tabulation> cache;
  const auto key = std::make_pair(degree, &rule);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const LocalBasis& basis = local_basis(degree);
  const int npts = static_cast<int>(rule.points.size());
  Tabulation tab;
  tab.values.resize(npts, basis.ldof);
  tab.grad_x.resize(npts, basis.ldof);
  tab.grad_y.resize(npts, basis.ldof);
  Eigen::VectorXd vals;
  Eigen::MatrixXd grads;
  for (int q = 0; q < npts; ++q) {
    basis.eval(rule.points[q], vals);
    basis.eval_grad(rule.points[q], grads);
    tab.values.row(q) = vals.transpose();
    tab.grad_x.row(q) = grads.col(0).transpose();
    tab.grad_y.row(q) = grads.col(1).transpose();
  }
  return cache.emplace(key, std::move(tab)).first->second;
}

int FeSpace::num_boundary_dofs() const {
  int n = 0;
  for (char b : boundary_dof) n += b != 0;
  return n;
}

FeSpace build_space(const Mesh& mesh, SpaceKind kind, int degree) {
  if (kind == SpaceKind::DG && (degree < 0 || degree > 3))
    throw std::invalid_argument("build_space: DG degree must be in 0..3");
  if (kind == SpaceKind::CG && (degree < 1 || degree > 3))
    throw std::invalid_argument("build_space: CG degree must be in 1..3");

  FeSpace sp;
  sp.mesh = &mesh;
  sp.kind = kind;
  sp.degree = degree;
  const LocalBasis& basis = local_basis(degree);
  sp.ldof = basis.ldof;
  const int ne = mesh.num_elements();
  sp.elem_dofs.resize(static_cast<size_t>(ne) * sp.ldof);

  if (kind == SpaceKind::DG) {
    sp.ndof = ne * sp.ldof;
    sp.boundary_dof.assign(sp.ndof, 0);
    sp.node_coords.resize(sp.ndof);
    for (int e = 0; e < ne; ++e)
      for (int i = 0; i < sp.ldof; ++i) {
        sp.elem_dofs[e * sp.ldof + i] = e * sp.ldof + i;
        sp.node_coords[e * sp.ldof + i] = mesh.map_to_physical(e, basis.nodes[i]);
      }
    return sp;
  }

  const int per_edge = degree - 1;
  const int per_elem = sp.ldof - 3 - 3 * per_edge;
  const int V = mesh.num_vertices(), E = mesh.num_facets();
  sp.ndof = V + per_edge * E + per_elem * ne;
  sp.boundary_dof.assign(sp.ndof, 0);
  sp.node_coords.resize(sp.ndof);

  for (int v = 0; v < V; ++v) {
    sp.node_coords[v] = mesh.vertex(v);
    sp.boundary_dof[v] = mesh.vertex_on_boundary(v) ? 1 : 0;
  }
  for (int e = 0; e < ne; ++e) {
    const auto& t = mesh.tri(e);
    int* dofs = &sp.elem_dofs[e * sp.ldof];
    for (int i = 0; i < 3; ++i) dofs[i] = t[i];
    for (int i = 0; i < 3; ++i) {
      const int f = mesh.elem_facets(e)[i];
      const int ga = t[(i + 1) % 3], gb = t[(i + 2) % 3];
      const int base = V + f * per_edge;
      for (int k = 0; k < per_edge; ++k) {
        // Edge dofs are enumerated along the edge from the smaller global
        // vertex id, so both adjacent elements agree on the slots.
        const int slot = ga < gb ? k : per_edge - 1 - k;
        const int d = base + slot;
        dofs[3 + i * per_edge + k] = d;
        sp.node_coords[d] = mesh.map_to_physical(e, basis.nodes[3 + i * per_edge + k]);
        if (mesh.facet(f).is_boundary) sp.boundary_dof[d] = 1;
      }
    }
    const int ibase = V + per_edge * E + e * per_elem;
    for (int k = 0; k < per_elem; ++k) {
      dofs[3 + 3 * per_edge + k] = ibase + k;
      sp.node_coords[ibase + k] = mesh.map_to_physical(e, basis.nodes[3 + 3 * per_edge + k]);
    }
  }
  return sp;
}

BasisEval eval_basis(const FeSpace& space, int elem, const Vec2& ref) {
  const LocalBasis& basis = local_basis(space.degree);
  BasisEval out;
  basis.eval(ref, out.values);
  Eigen::MatrixXd ref_grads;
  basis.eval_grad(ref, ref_grads);
  const Eigen::Matrix2d Jinv_t = space.mesh->jacobian(elem).inverse().transpose();
  out.grads.resize(basis.ldof, 2);
  for (int i = 0; i < basis.ldof; ++i)
    out.grads.row(i) = (Jinv_t * ref_grads.row(i).transpose()).transpose();
  return out;
}

double FeFunction::eval(int elem, const Vec2& ref) const {
  const LocalBasis& basis = local_basis(space->degree);
  Eigen::VectorXd vals;
  basis.eval(ref, vals);
  double s = 0;
  for (int i = 0; i < space->ldof; ++i) s += coef[space->dof(elem, i)] * vals[i];
  return s;
}

Vec2 FeFunction::grad(int elem, const Vec2& ref) const {
  const LocalBasis& basis = local_basis(space->degree);
  Eigen::MatrixXd grads;
  basis.eval_grad(ref, grads);
  Vec2 g = Vec2::Zero();
  for (int i = 0; i < space->ldof; ++i) g += coef[space->dof(elem, i)] * grads.row(i).transpose();
  return space->mesh->jacobian(elem).inverse().transpose() * g;
}

FeFunction interpolate(const FeSpace& space, const ScalarField& u) {
  FeFunction fn;
  fn.space = &space;
  fn.coef.resize(space.ndof);
  for (int d = 0; d < space.ndof; ++d) fn.coef[d] = u(space.node_coords[d]);
  return fn;
}

FeFunction l2_project(const FeSpace& space, const ScalarField& g, int quad_degree) {
  if (space.kind != SpaceKind::DG)
    throw std::invalid_argument("l2_project: element-wise projection requires a DG space");
  if (quad_degree < 0) quad_degree = std::max(2 * space.degree + 2, 6);
  const QuadRule& rule = tri_rule(quad_degree);
  const Tabulation& tab = tabulate(space.degree, rule);
  const Mesh& mesh = *space.mesh;

  FeFunction fn;
  fn.space = &space;
  fn.coef.resize(space.ndof);
  const int ld = space.ldof;
  Eigen::MatrixXd M(ld, ld);
  Eigen::VectorXd rhs(ld);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    M.setZero();
    rhs.setZero();
    const double jac = 2.0 * mesh.area(e);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * jac;
      const auto phi = tab.values.row(q);
      M.noalias() += w * phi.transpose() * phi;
      rhs.noalias() += w * g(mesh.map_to_physical(e, rule.points[q])) * phi.transpose();
    }
    const Eigen::VectorXd local = M.ldlt().solve(rhs);
    for (int i = 0; i < ld; ++i) fn.coef[space.dof(e, i)] = local[i];
  }
  return fn;
}

ErrorNorms error_norms(const FeFunction& fn, const ScalarField& u, const VectorField& grad_u,
                       int quad_degree) {
  const FeSpace& space = *fn.space;
  if (quad_degree < 0) quad_degree = std::max(2 * space.degree + 2, 6);
  const QuadRule& rule = tri_rule(quad_degree);
  const Tabulation& tab = tabulate(space.degree, rule);
  const Mesh& mesh = *space.mesh;

  double l2 = 0, h1 = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = 2.0 * mesh.area(e);
    const Eigen::Matrix2d Jinv_t = mesh.jacobian(e).inverse().transpose();
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const double w = rule.weights[q] * jac;
      const Vec2 x = mesh.map_to_physical(e, rule.points[q]);
      double val = 0;
      Vec2 ref_grad = Vec2::Zero();
      for (int i = 0; i < space.ldof; ++i) {
        const double c = fn.coef[space.dof(e, i)];
        val += c * tab.values(q, i);
        ref_grad.x() += c * tab.grad_x(q, i);
        ref_grad.y() += c * tab.grad_y(q, i);
      }
      const double diff = u(x) - val;
      const Vec2 gdiff = grad_u(x) - Jinv_t * ref_grad;
      l2 += w * diff * diff;
      h1 += w * gdiff.squaredNorm();
    }
  }
  return {std::sqrt(l2), std::sqrt(h1)};
}

namespace {

// Jump content of a facet: integral of sigma * [fn]^2 with the convention
// that boundary facets contribute the trace itself.
double facet_jump_sq(const FeFunction& fn, int f, double sigma, int quad_degree) {
  const FeSpace& space = *fn.space;
  const Mesh& mesh = *space.mesh;
  const Facet& fa = mesh.facet(f);
  const QuadRule& rule = edge_rule(quad_degree);
  double acc = 0;
  const Vec2 a = mesh.vertex(fa.verts[0]), b = mesh.vertex(fa.verts[1]);
  for (size_t q = 0; q < rule.points.size(); ++q) {
    const Vec2 x = a + rule.points[q].x() * (b - a);
    double jump = fn.eval(fa.elems[0], mesh.map_to_reference(fa.elems[0], x));
    if (!fa.is_boundary) jump -= fn.eval(fa.elems[1], mesh.map_to_reference(fa.elems[1], x));
    acc += rule.weights[q] * fa.length * sigma * jump * jump;
  }
  return acc;
}

}  // namespace

double dg_norm(const FeFunction& fn, const std::vector<double>& sigma_facet) {
  const FeSpace& space = *fn.space;
  const Mesh& mesh = *space.mesh;
  if (static_cast<int>(sigma_facet.size()) != mesh.num_facets())
    throw std::invalid_argument("dg_norm: one sigma value per facet required");

  const int vol_degree = std::max(1, 2 * (space.degree - 1));
  const QuadRule& rule = tri_rule(vol_degree);
  const Tabulation& tab = tabulate(space.degree, rule);
  double acc = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = 2.0 * mesh.area(e);
    const Eigen::Matrix2d Jinv_t = mesh.jacobian(e).inverse().transpose();
    for (size_t q = 0; q < rule.points.size(); ++q) {
      Vec2 ref_grad = Vec2::Zero();
      for (int i = 0; i < space.ldof; ++i) {
        const double c = fn.coef[space.dof(e, i)];
        ref_grad.x() += c * tab.grad_x(q, i);
        ref_grad.y() += c * tab.grad_y(q, i);
      }
      acc += rule.weights[q] * jac * (Jinv_t * ref_grad).squaredNorm();
    }
  }
  const int edge_degree = std::max(1, 2 * space.degree);
  for (int f = 0; f < mesh.num_facets(); ++f)
    acc += facet_jump_sq(fn, f, sigma_facet[f], edge_degree);
  return std::sqrt(acc);
}

double dg_norm_error(const FeFunction& fn, const VectorField& grad_u,
                     const std::vector<double>& sigma_facet, int quad_degree) {
  const FeSpace& space = *fn.space;
  const Mesh& mesh = *space.mesh;
  if (quad_degree < 0) quad_degree = std::max(2 * space.degree + 2, 6);
  const QuadRule& rule = tri_rule(quad_degree);
  const Tabulation& tab = tabulate(space.degree, rule);

  double acc = 0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const double jac = 2.0 * mesh.area(e);
    const Eigen::Matrix2d Jinv_t = mesh.jacobian(e).inverse().transpose();
    for (size_t q = 0; q < rule.points.size(); ++q) {
      Vec2 ref_grad = Vec2::Zero();
      for (int i = 0; i < space.ldof; ++i) {
        const double c = fn.coef[space.dof(e, i)];
        ref_grad.x() += c * tab.grad_x(q, i);
        ref_grad.y() += c * tab.grad_y(q, i);
      }
      const Vec2 gdiff = grad_u(mesh.map_to_physical(e, rule.points[q])) - Jinv_t * ref_grad;
      acc += rule.weights[q] * jac * gdiff.squaredNorm();
    }
  }
  // The exact solution is continuous with zero boundary trace, so the jumps
  // of (u - fn) reduce to the jumps of fn.
  const int edge_degree = std::max(1, 2 * space.degree);
  for (int f = 0; f < mesh.num_facets(); ++f)
    acc += facet_jump_sq(fn, f, sigma_facet[f], edge_degree);
  return std::sqrt(acc);
}

void write_function_csv(const FeFunction& fn, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_function_csv: cannot open " + path);
  const FeSpace& space = *fn.space;
  char buf[160];
  if (space.kind == SpaceKind::CG) {
    out << "x,y,value\n";
    for (int d = 0; d < space.ndof; ++d) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", space.node_coords[d].x(),
                    space.node_coords[d].y(), fn.coef[d]);
      out << buf;
    }
  } else {
    out << "elem,x,y,value\n";
    for (int e = 0; e < space.mesh->num_elements(); ++e)
      for (int i = 0; i < space.ldof; ++i) {
        const int d = space.dof(e, i);
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", e, space.node_coords[d].x(),
                      space.node_coords[d].y(), fn.coef[d]);
        out << buf;
      }
  }
}

}  // namespace rfem
