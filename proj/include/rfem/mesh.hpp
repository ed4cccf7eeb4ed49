#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rfem {

using Vec2 = Eigen::Vector2d;

/// Oriented mesh edge shared by one (boundary) or two elements.
struct Facet {
  std::array<int, 2> verts{-1, -1};
  std::array<int, 2> elems{-1, -1};  ///< adjacent elements; elems[1] = -1 on the boundary
  Vec2 normal = Vec2::Zero();        ///< unit normal pointing out of elems[0]
  double length = 0.0;
  bool is_boundary = false;
};

/// Conforming triangulation with facet topology and bisection support.
///
/// Immutable after construction; refinement returns a new mesh. Triangles are
/// stored counter-clockwise, facet normals point out of the lower-indexed
/// adjacent element, and every triangle carries a refinement edge (the local
/// edge opposite its newest vertex) driving newest-vertex bisection. Local
/// edge i connects local vertices (i+1)%3 and (i+2)%3.
class Mesh {
 public:
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
       std::vector<int> refinement_edges, std::vector<int> parents);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(tris_.size()); }
  int num_facets() const { return static_cast<int>(facets_.size()); }

  const Vec2& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& tri(int e) const { return tris_[e]; }
  const Facet& facet(int f) const { return facets_[f]; }
  const std::array<int, 3>& elem_facets(int e) const { return elem_facets_[e]; }

  double area(int e) const { return areas_[e]; }
  double elem_diameter(int e) const { return diams_[e]; }
  /// Mesh-size function on a facet: mean of adjacent diameters, or the single
  /// adjacent diameter on the boundary.
  double facet_h(int f) const;
  int refinement_edge(int e) const { return refinement_edge_[e]; }
  bool vertex_on_boundary(int v) const { return boundary_vertex_[v] != 0; }

  /// Element index in the source mesh for each element of a refined mesh
  /// (identity for meshes built directly).
  const std::vector<int>& parents() const { return parents_; }

  /// Affine map: Jacobian columns are the two edge vectors out of vertex 0.
  Eigen::Matrix2d jacobian(int e) const;
  Vec2 map_to_physical(int e, const Vec2& ref) const;
  Vec2 map_to_reference(int e, const Vec2& x) const;

  double max_diameter() const;
  double min_angle() const;

 private:
  void build_topology();

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<Facet> facets_;
  std::vector<std::array<int, 3>> elem_facets_;
  std::vector<double> areas_;
  std::vector<double> diams_;
  std::vector<int> refinement_edge_;
  std::vector<char> boundary_vertex_;
  std::vector<int> parents_;
};

/// n x n criss-cross grid on an axis-aligned rectangle: each cell is split
/// into four triangles through its centre.
Mesh make_crisscross(int n, const Vec2& lo = Vec2(0, 0), const Vec2& hi = Vec2(1, 1));

/// Criss-cross mesh of the L-shaped domain (-1,1)^2 minus the closed fourth
/// quadrant, with n cells per unit length (3n^2 cells, 12n^2 triangles).
Mesh make_lshape(int n);

/// Newest-vertex bisection of the marked elements with recursive conforming
/// closure. Single bisection generation per marked element (closure may split
/// further elements).
Mesh refine(const Mesh& mesh, std::span<const int> marked);

/// Two bisection generations applied to every element; on criss-cross meshes
/// this reproduces the criss-cross mesh with doubled resolution exactly.
Mesh uniform_refine(const Mesh& mesh);

/// Plain-text export: "V F" header, V lines "x y", F lines "i j k" (0-based).
void write_mesh(const Mesh& mesh, const std::string& path);

}  // namespace rfem
