#include "rfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <utility>

namespace rfem {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles)
    : Mesh(std::move(vertices), std::move(triangles), {}, {}) {}

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
           std::vector<int> refinement_edges, std::vector<int> parents)
    : vertices_(std::move(vertices)),
      tris_(std::move(triangles)),
      refinement_edge_(std::move(refinement_edges)),
      parents_(std::move(parents)) {
  const int ne = num_elements();
  areas_.resize(ne);
  diams_.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const auto& t = tris_[e];
    for (int k : t) {
      if (k < 0 || k >= num_vertices()) throw std::invalid_argument("mesh: vertex index out of range");
    }
    const Vec2 &a = vertices_[t[0]], &b = vertices_[t[1]], &c = vertices_[t[2]];
    areas_[e] = signed_area(a, b, c);
    if (!(areas_[e] > 0.0)) throw std::invalid_argument("mesh: triangle is not counter-clockwise");
    diams_[e] = std::max({(b - a).norm(), (c - b).norm(), (a - c).norm()});
  }
  if (parents_.empty()) {
    parents_.resize(ne);
    for (int e = 0; e < ne; ++e) parents_[e] = e;
  }
  build_topology();
  if (refinement_edge_.empty()) {
    // Initial assignment: bisect the longest edge (deterministic tie-break on
    // the local index).
    refinement_edge_.resize(ne);
    for (int e = 0; e < ne; ++e) {
      const auto& t = tris_[e];
      int best = 0;
      double best_len = -1.0;
      for (int i = 0; i < 3; ++i) {
        double len = (vertices_[t[(i + 2) % 3]] - vertices_[t[(i + 1) % 3]]).norm();
        if (len > best_len + 1e-14 * (1.0 + best_len)) {
          best_len = len;
          best = i;
        }
      }
      refinement_edge_[e] = best;
    }
  }
}

void Mesh::build_topology() {
  const int ne = num_elements();
  elem_facets_.assign(ne, {-1, -1, -1});
  facets_.clear();
  std::map<std::pair<int, int>, int> facet_of_edge;
  for (int e = 0; e < ne; ++e) {
    const auto& t = tris_[e];
    for (int i = 0; i < 3; ++i) {
      const int a = t[(i + 1) % 3], b = t[(i + 2) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = facet_of_edge.try_emplace(key, num_facets());
      if (inserted) {
        Facet f;
        f.verts = {a, b};
        f.elems = {e, -1};
        const Vec2 d = vertices_[b] - vertices_[a];
        f.length = d.norm();
        // Edge (a,b) is traversed CCW within element e, so the outward normal
        // is the clockwise rotation of the edge direction.
        f.normal = Vec2(d.y(), -d.x()) / f.length;
        f.is_boundary = true;
        facets_.push_back(f);
      } else {
        Facet& f = facets_[it->second];
        if (f.elems[1] != -1) throw std::invalid_argument("mesh: edge shared by more than two triangles");
        f.elems[1] = e;
        f.is_boundary = false;
      }
      elem_facets_[e][i] = it->second;
    }
  }
  boundary_vertex_.assign(num_vertices(), 0);
  for (const Facet& f : facets_) {
    if (f.is_boundary) {
      boundary_vertex_[f.verts[0]] = 1;
      boundary_vertex_[f.verts[1]] = 1;
    }
  }
}

double Mesh::facet_h(int f) const {
  const Facet& fa = facets_[f];
  if (fa.is_boundary) return diams_[fa.elems[0]];
  return 0.5 * (diams_[fa.elems[0]] + diams_[fa.elems[1]]);
}

Eigen::Matrix2d Mesh::jacobian(int e) const {
  const auto& t = tris_[e];
  Eigen::Matrix2d J;
  J.col(0) = vertices_[t[1]] - vertices_[t[0]];
  J.col(1) = vertices_[t[2]] - vertices_[t[0]];
  return J;
}

Vec2 Mesh::map_to_physical(int e, const Vec2& ref) const {
  return vertices_[tris_[e][0]] + jacobian(e) * ref;
}

Vec2 Mesh::map_to_reference(int e, const Vec2& x) const {
  return jacobian(e).inverse() * (x - vertices_[tris_[e][0]]);
}

double Mesh::max_diameter() const {
  return *std::max_element(diams_.begin(), diams_.end());
}

double Mesh::min_angle() const {
  double best = 4.0;
  for (int e = 0; e < num_elements(); ++e) {
    const auto& t = tris_[e];
    for (int i = 0; i < 3; ++i) {
      const Vec2 u = vertices_[t[(i + 1) % 3]] - vertices_[t[i]];
      const Vec2 v = vertices_[t[(i + 2) % 3]] - vertices_[t[i]];
      best = std::min(best, std::acos(std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0)));
    }
  }
  return best;
}

Mesh make_crisscross(int n, const Vec2& lo, const Vec2& hi) {
  if (n < 1) throw std::invalid_argument("make_crisscross: n must be positive");
  std::vector<Vec2> verts;
  verts.reserve((n + 1) * (n + 1) + n * n);
  const double hx = (hi.x() - lo.x()) / n, hy = (hi.y() - lo.y()) / n;
  auto corner = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) verts.emplace_back(lo.x() + i * hx, lo.y() + j * hy);
  auto centre = [n](int i, int j) { return (n + 1) * (n + 1) + j * n + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      verts.emplace_back(lo.x() + (i + 0.5) * hx, lo.y() + (j + 0.5) * hy);

  std::vector<std::array<int, 3>> tris;
  tris.reserve(4 * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = corner(i, j), v10 = corner(i + 1, j);
      const int v11 = corner(i + 1, j + 1), v01 = corner(i, j + 1);
      const int m = centre(i, j);
      tris.push_back({v00, v10, m});
      tris.push_back({v10, v11, m});
      tris.push_back({v11, v01, m});
      tris.push_back({v01, v00, m});
    }
  }
  return Mesh(std::move(verts), std::move(tris));
}

Mesh make_lshape(int n) {
  if (n < 1) throw std::invalid_argument("make_lshape: n must be positive");
  const int N = 2 * n;
  const double h = 1.0 / n;
  auto keep = [&](int i, int j) { return !(i >= n && j < n); };

  std::vector<Vec2> verts;
  std::vector<int> corner_id((N + 1) * (N + 1), -1);
  auto corner = [&](int i, int j) -> int {
    int& id = corner_id[j * (N + 1) + i];
    if (id < 0) {
      id = static_cast<int>(verts.size());
      verts.emplace_back(-1.0 + i * h, -1.0 + j * h);
    }
    return id;
  };

  std::vector<std::array<int, 3>> tris;
  tris.reserve(12 * n * n);
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) {
      if (!keep(i, j)) continue;
      const int v00 = corner(i, j), v10 = corner(i + 1, j);
      const int v11 = corner(i + 1, j + 1), v01 = corner(i, j + 1);
      const int m = static_cast<int>(verts.size());
      verts.emplace_back(-1.0 + (i + 0.5) * h, -1.0 + (j + 0.5) * h);
      tris.push_back({v00, v10, m});
      tris.push_back({v10, v11, m});
      tris.push_back({v11, v01, m});
      tris.push_back({v01, v00, m});
    }
  }
  return Mesh(std::move(verts), std::move(tris));
}

Mesh refine(const Mesh& mesh, std::span<const int> marked) {
  const int ne = mesh.num_elements();
  std::vector<char> edge_marked(mesh.num_facets(), 0);
  for (int e : marked) {
    if (e < 0 || e >= ne) throw std::invalid_argument("refine: marked element out of range");
    edge_marked[mesh.elem_facets(e)[mesh.refinement_edge(e)]] = 1;
  }

  // Conforming closure: an element with any marked edge must also have its
  // refinement edge marked. Iterate to a fixpoint (marking only grows).
  bool changed = true;
  while (changed) {
    changed = false;
    for (int e = 0; e < ne; ++e) {
      const auto& ef = mesh.elem_facets(e);
      const int rf = ef[mesh.refinement_edge(e)];
      if (edge_marked[rf]) continue;
      if (edge_marked[ef[0]] || edge_marked[ef[1]] || edge_marked[ef[2]]) {
        edge_marked[rf] = 1;
        changed = true;
      }
    }
  }

  std::vector<Vec2> verts(mesh.num_vertices());
  for (int v = 0; v < mesh.num_vertices(); ++v) verts[v] = mesh.vertex(v);
  std::vector<int> midpoint(mesh.num_facets(), -1);
  for (int f = 0; f < mesh.num_facets(); ++f) {
    if (edge_marked[f]) {
      const Facet& fa = mesh.facet(f);
      midpoint[f] = static_cast<int>(verts.size());
      verts.push_back(0.5 * (mesh.vertex(fa.verts[0]) + mesh.vertex(fa.verts[1])));
    }
  }

  std::vector<std::array<int, 3>> tris;
  std::vector<int> redges, parents;

  // Facet lookup restricted to the source mesh; edges created by bisection are
  // never marked, so a failed lookup terminates the recursion.
  std::map<std::pair<int, int>, int> old_facet;
  for (int f = 0; f < mesh.num_facets(); ++f) {
    const auto& fv = mesh.facet(f).verts;
    old_facet[std::minmax(fv[0], fv[1])] = f;
  }
  auto marked_facet = [&](int a, int b) -> int {
    auto it = old_facet.find(std::minmax(a, b));
    if (it == old_facet.end() || !edge_marked[it->second]) return -1;
    return it->second;
  };

  // Triangle (p, a, b) is CCW with peak p and refinement edge (a, b); children
  // inherit the bisection midpoint as their peak. Storing triangles
  // peak-first puts the refinement edge at local index 0 in every case.
  auto emit = [&](auto&& self, int p, int a, int b, int parent) -> void {
    const int f = marked_facet(a, b);
    if (f < 0) {
      tris.push_back({p, a, b});
      redges.push_back(0);
      parents.push_back(parent);
      return;
    }
    const int m = midpoint[f];
    self(self, m, p, a, parent);
    self(self, m, b, p, parent);
  };

  for (int e = 0; e < ne; ++e) {
    const auto& t = mesh.tri(e);
    const int r = mesh.refinement_edge(e);
    emit(emit, t[r], t[(r + 1) % 3], t[(r + 2) % 3], e);
  }
  return Mesh(std::move(verts), std::move(tris), std::move(redges), std::move(parents));
}

Mesh uniform_refine(const Mesh& mesh) {
  std::vector<int> all(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e) all[e] = e;
  Mesh once = refine(mesh, all);
  std::vector<int> all2(once.num_elements());
  for (int e = 0; e < once.num_elements(); ++e) all2[e] = e;
  Mesh twice = refine(once, all2);
  // Compose parent maps so children point at the original elements.
  std::vector<int> parents(twice.num_elements());
  for (int e = 0; e < twice.num_elements(); ++e) parents[e] = once.parents()[twice.parents()[e]];
  std::vector<Vec2> verts(twice.num_vertices());
  for (int v = 0; v < twice.num_vertices(); ++v) verts[v] = twice.vertex(v);
  std::vector<std::array<int, 3>> tris(twice.num_elements());
  std::vector<int> redges(twice.num_elements());
  for (int e = 0; e < twice.num_elements(); ++e) {
    tris[e] = twice.tri(e);
    redges[e] = twice.refinement_edge(e);
  }
  return Mesh(std::move(verts), std::move(tris), std::move(redges), std::move(parents));
}

void write_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_mesh: cannot open " + path);
  char buf[80];
  out << mesh.num_vertices() << " " << mesh.num_elements() << "\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", mesh.vertex(v).x(), mesh.vertex(v).y());
    out << buf;
  }
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& t = mesh.tri(e);
    out << t[0] << " " << t[1] << " " << t[2] << "\n";
  }
}

}  // namespace rfem
