#pragma once

#include <optional>
#include <vector>

#include "pwanav/common.hpp"

namespace pwanav::geometry {

/// Outward halfspace n·x <= offset with unit-length normal.
struct Halfspace {
  Vec normal;
  double offset = 0.0;
};

/// Bounded, full-dimensional convex polytope carrying both representations and
/// the facet/vertex incidence used by the reachability conditions.
///
/// facet_vertices(i) is the sorted set of vertex indices lying on facet i and
/// vertex_facets(j) is the sorted set of facets containing vertex j; the two
/// are computed together so they are always mutually consistent.
class Polytope {
 public:
  Polytope() = default;

  /// Normals are rescaled to unit length (offsets scaled accordingly). Throws
  /// InvalidDomainError if a normal is zero or a vertex violates a halfspace.
  Polytope(std::vector<Halfspace> halfspaces, std::vector<Vec> vertices);

  int dim() const { return dim_; }
  int num_facets() const { return static_cast<int>(halfspaces_.size()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }

  const Halfspace& facet(int i) const { return halfspaces_.at(i); }
  const Vec& normal(int i) const { return halfspaces_.at(i).normal; }
  double offset(int i) const { return halfspaces_.at(i).offset; }
  const Vec& vertex(int j) const { return vertices_.at(j); }
  const std::vector<Vec>& vertices() const { return vertices_; }
  const std::vector<int>& facet_vertices(int i) const { return facet_vertex_index_.at(i); }
  const std::vector<int>& vertex_facets(int j) const { return vertex_facet_index_.at(j); }

  bool contains(const Vec& x, double tol = kGeomTol) const;

  /// Largest signed violation max_i (n_i·x - offset_i) and the facet attaining
  /// it (lowest index on ties).
  std::pair<double, int> max_violation(const Vec& x) const;

  /// Mean of the vertices; the box center for boxes.
  Vec center() const;

  /// The bounding box, valid when is_box().
  bool is_box() const;
  Box as_box() const;

 private:
  int dim_ = 0;
  std::vector<Halfspace> halfspaces_;
  std::vector<Vec> vertices_;
  std::vector<std::vector<int>> facet_vertex_index_;
  std::vector<std::vector<int>> vertex_facet_index_;
};

/// Axis-aligned box as a polytope. Facet 2d is the lower face of dimension d
/// (normal -e_d), facet 2d+1 the upper face (normal +e_d). Vertex j takes hi_d
/// where bit d of j is set, lo_d otherwise, so vertex 0 is the
/// lexicographically smallest corner.
Polytope make_box(const Box& box);

using CellId = int;

class GridPartition {
 public:
  GridPartition() = default;
  GridPartition(Box bounds, std::vector<int> resolution);

  const Box& bounds() const { return bounds_; }
  const std::vector<int>& resolution() const { return resolution_; }
  int dim() const { return bounds_.dim(); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  const Polytope& cell(CellId id) const;
  const Vec& cell_width() const { return width_; }
  double cell_diameter() const { return width_.norm(); }
  Vec center(CellId id) const;

  /// Multi-index with dimension 0 varying fastest.
  std::vector<int> multi_index(CellId id) const;
  CellId cell_id(const std::vector<int>& multi_index) const;

  /// Cells sharing a facet with `id`, ascending.
  std::vector<CellId> neighbors(CellId id) const;

 private:
  void check_id(CellId id) const;

  Box bounds_;
  std::vector<int> resolution_;
  Vec width_;
  std::vector<Polytope> cells_;
};

/// Indices into the parent polytope's vertex list; n+1 entries.
struct Simplex {
  std::vector<int> vertex_indices;
};

GridPartition build_grid_partition(const Box& bounds, const std::vector<int>& resolution);

/// Facet of cell_a that coincides (as a point set) with a facet of cell_b.
std::optional<int> common_facet(const GridPartition& partition, CellId cell_a, CellId cell_b);

/// Points on shared facets resolve to the cell with the larger multi-index.
CellId locate(const GridPartition& partition, const Vec& x);

/// Kuhn triangulation of a box: one simplex per permutation of the axes,
/// walking from vertex 0 to the opposite corner. Permutations are visited in
/// lexicographic order, so the simplex order is fixed.
std::vector<Simplex> triangulate(const Polytope& cell);

double simplex_measure(const Polytope& cell, const Simplex& simplex);

/// Barycentric coordinates of x with respect to the simplex.
Vec barycentric(const Polytope& cell, const Simplex& simplex, const Vec& x);

}  // namespace pwanav::geometry
