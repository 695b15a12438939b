#include "pwanav/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace pwanav::geometry {

Polytope::Polytope(std::vector<Halfspace> halfspaces, std::vector<Vec> vertices)
    : halfspaces_(std::move(halfspaces)), vertices_(std::move(vertices)) {
  if (halfspaces_.empty() || vertices_.empty()) {
    throw InvalidDomainError("polytope needs at least one halfspace and one vertex");
  }
  dim_ = static_cast<int>(vertices_.front().size());
  if (static_cast<int>(vertices_.size()) < dim_ + 1) {
    throw InvalidDomainError("polytope is not full-dimensional");
  }
  for (auto& h : halfspaces_) {
    if (h.normal.size() != dim_) throw InvalidDomainError("halfspace dimension mismatch");
    const double norm = h.normal.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) throw InvalidDomainError("zero halfspace normal");
    h.normal /= norm;
    h.offset /= norm;
  }

  facet_vertex_index_.assign(halfspaces_.size(), {});
  vertex_facet_index_.assign(vertices_.size(), {});
  for (int j = 0; j < num_vertices(); ++j) {
    if (vertices_[j].size() != dim_) throw InvalidDomainError("vertex dimension mismatch");
    for (int i = 0; i < num_facets(); ++i) {
      const double s = halfspaces_[i].normal.dot(vertices_[j]) - halfspaces_[i].offset;
      if (s > kGeomTol) {
        throw InvalidDomainError("vertex " + std::to_string(j) + " violates facet " +
                                 std::to_string(i));
      }
      if (s >= -kGeomTol) {
        facet_vertex_index_[i].push_back(j);
        vertex_facet_index_[j].push_back(i);
      }
    }
  }
}

bool Polytope::contains(const Vec& x, double tol) const {
  return max_violation(x).first <= tol;
}

std::pair<double, int> Polytope::max_violation(const Vec& x) const {
  double best = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int i = 0; i < num_facets(); ++i) {
    const double s = halfspaces_[i].normal.dot(x) - halfspaces_[i].offset;
    if (s > best) {
      best = s;
      arg = i;
    }
  }
  return {best, arg};
}

Vec Polytope::center() const {
  Vec c = Vec::Zero(dim_);
  for (const auto& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

bool Polytope::is_box() const {
  if (num_facets() != 2 * dim_ || num_vertices() != (1 << dim_)) return false;
  for (int i = 0; i < num_facets(); ++i) {
    const int d = i / 2;
    const double sign = (i % 2 == 0) ? -1.0 : 1.0;
    Vec expected = Vec::Zero(dim_);
    expected[d] = sign;
    if ((normal(i) - expected).lpNorm<Eigen::Infinity>() > 1e-12) return false;
  }
  return true;
}

Box Polytope::as_box() const {
  if (!is_box()) throw UnsupportedGeometryError("polytope is not an axis-aligned box");
  Box b{Vec(dim_), Vec(dim_)};
  for (int d = 0; d < dim_; ++d) {
    b.lo[d] = -offset(2 * d);
    b.hi[d] = offset(2 * d + 1);
  }
  return b;
}

Polytope make_box(const Box& box) {
  const int n = box.dim();
  std::vector<Halfspace> hs;
  hs.reserve(2 * n);
  for (int d = 0; d < n; ++d) {
    Vec e = Vec::Zero(n);
    e[d] = -1.0;
    hs.push_back({e, -box.lo[d]});
    e[d] = 1.0;
    hs.push_back({e, box.hi[d]});
  }
  std::vector<Vec> verts;
  verts.reserve(std::size_t{1} << n);
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vec v(n);
    for (int d = 0; d < n; ++d) v[d] = (mask >> d) & 1 ? box.hi[d] : box.lo[d];
    verts.push_back(std::move(v));
  }
  return Polytope(std::move(hs), std::move(verts));
}

GridPartition::GridPartition(Box bounds, std::vector<int> resolution)
    : bounds_(std::move(bounds)), resolution_(std::move(resolution)) {
  const int n = bounds_.dim();
  if (n == 0 || bounds_.hi.size() != n) throw InvalidDomainError("bounds dimension mismatch");
  if (static_cast<int>(resolution_.size()) != n) {
    throw InvalidDomainError("resolution must have one entry per dimension");
  }
  for (int d = 0; d < n; ++d) {
    if (!std::isfinite(bounds_.lo[d]) || !std::isfinite(bounds_.hi[d]) ||
        !(bounds_.lo[d] < bounds_.hi[d])) {
      throw InvalidDomainError("degenerate bounds in dimension " + std::to_string(d));
    }
    if (resolution_[d] < 1) throw InvalidDomainError("resolution must be >= 1");
  }
  width_ = (bounds_.hi - bounds_.lo).cwiseQuotient(
      Eigen::Map<const Eigen::VectorXi>(resolution_.data(), n).cast<double>());

  const int total = std::accumulate(resolution_.begin(), resolution_.end(), 1,
                                    std::multiplies<>());
  cells_.reserve(total);
  for (CellId id = 0; id < total; ++id) {
    const auto idx = multi_index(id);
    Box cb{Vec(n), Vec(n)};
    for (int d = 0; d < n; ++d) {
      cb.lo[d] = bounds_.lo[d] + idx[d] * width_[d];
      // Last cell snaps to the domain edge so the union is exactly P_s.
      cb.hi[d] = idx[d] + 1 == resolution_[d] ? bounds_.hi[d]
                                               : bounds_.lo[d] + (idx[d] + 1) * width_[d];
    }
    cells_.push_back(make_box(cb));
  }
}

void GridPartition::check_id(CellId id) const {
  if (id < 0 || id >= num_cells()) {
    throw PreconditionError("cell id " + std::to_string(id) + " out of range");
  }
}

const Polytope& GridPartition::cell(CellId id) const {
  check_id(id);
  return cells_[id];
}

Vec GridPartition::center(CellId id) const { return cell(id).center(); }

std::vector<int> GridPartition::multi_index(CellId id) const {
  std::vector<int> idx(resolution_.size());
  for (std::size_t d = 0; d < resolution_.size(); ++d) {
    idx[d] = id % resolution_[d];
    id /= resolution_[d];
  }
  return idx;
}

CellId GridPartition::cell_id(const std::vector<int>& multi_index) const {
  CellId id = 0;
  for (int d = static_cast<int>(resolution_.size()) - 1; d >= 0; --d) {
    if (multi_index[d] < 0 || multi_index[d] >= resolution_[d]) {
      throw PreconditionError("multi-index out of range");
    }
    id = id * resolution_[d] + multi_index[d];
  }
  return id;
}

std::vector<CellId> GridPartition::neighbors(CellId id) const {
  const auto idx = multi_index(id);
  std::vector<CellId> out;
  for (std::size_t d = 0; d < idx.size(); ++d) {
    for (int step : {-1, 1}) {
      auto other = idx;
      other[d] += step;
      if (other[d] >= 0 && other[d] < resolution_[d]) out.push_back(cell_id(other));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

GridPartition build_grid_partition(const Box& bounds, const std::vector<int>& resolution) {
  return GridPartition(bounds, resolution);
}

std::optional<int> common_facet(const GridPartition& partition, CellId cell_a, CellId cell_b) {
  const Polytope& a = partition.cell(cell_a);
  const Polytope& b = partition.cell(cell_b);
  if (cell_a == cell_b) return std::nullopt;

  auto same_points = [](const Polytope& p, const std::vector<int>& pi, const Polytope& q,
                        const std::vector<int>& qi) {
    if (pi.size() != qi.size()) return false;
    for (int j : pi) {
      const bool found = std::any_of(qi.begin(), qi.end(), [&](int k) {
        return (p.vertex(j) - q.vertex(k)).lpNorm<Eigen::Infinity>() <= kGeomTol;
      });
      if (!found) return false;
    }
    return true;
  };

  for (int i = 0; i < a.num_facets(); ++i) {
    for (int k = 0; k < b.num_facets(); ++k) {
      if ((a.normal(i) + b.normal(k)).lpNorm<Eigen::Infinity>() > kGeomTol) continue;
      if (std::abs(a.offset(i) + b.offset(k)) > kGeomTol) continue;
      if (same_points(a, a.facet_vertices(i), b, b.facet_vertices(k))) return i;
    }
  }
  return std::nullopt;
}

CellId locate(const GridPartition& partition, const Vec& x) {
  const Box& box = partition.bounds();
  if (!box.contains(x, kGeomTol)) throw OutOfDomainError("state lies outside the state domain");
  std::vector<int> idx(partition.dim());
  for (int d = 0; d < partition.dim(); ++d) {
    const int r = partition.resolution()[d];
    const int i = static_cast<int>(std::floor((x[d] - box.lo[d]) / partition.cell_width()[d]));
    idx[d] = std::clamp(i, 0, r - 1);
  }
  return partition.cell_id(idx);
}

std::vector<Simplex> triangulate(const Polytope& cell) {
  if (!cell.is_box()) throw UnsupportedGeometryError("triangulation supports boxes only");
  const int n = cell.dim();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Simplex> out;
  do {
    Simplex s;
    int mask = 0;
    s.vertex_indices.push_back(mask);
    for (int d : perm) {
      mask |= 1 << d;
      s.vertex_indices.push_back(mask);
    }
    out.push_back(std::move(s));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

namespace {

Mat edge_matrix(const Polytope& cell, const Simplex& simplex) {
  const int n = cell.dim();
  const Vec& v0 = cell.vertex(simplex.vertex_indices.at(0));
  Mat e(n, n);
  for (int k = 0; k < n; ++k) e.col(k) = cell.vertex(simplex.vertex_indices.at(k + 1)) - v0;
  return e;
}

}  // namespace

double simplex_measure(const Polytope& cell, const Simplex& simplex) {
  double fact = 1.0;
  for (int k = 2; k <= cell.dim(); ++k) fact *= k;
  return std::abs(edge_matrix(cell, simplex).determinant()) / fact;
}

Vec barycentric(const Polytope& cell, const Simplex& simplex, const Vec& x) {
  const int n = cell.dim();
  const Vec rest = edge_matrix(cell, simplex).fullPivLu().solve(
      x - cell.vertex(simplex.vertex_indices.at(0)));
  Vec lambda(n + 1);
  lambda[0] = 1.0 - rest.sum();
  lambda.tail(n) = rest;
  return lambda;
}

}  // namespace pwanav::geometry
