#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "pwanav/geometry.hpp"
#include "support.hpp"

using namespace pwanav;
using namespace pwanav::geometry;
using namespace testing_support;

namespace {

// (n-1)-measure of a box facet: product of the extents of its vertices over
// the remaining axes.
double facet_measure(const Polytope& p, int facet) {
  const auto& idx = p.facet_vertices(facet);
  const int axis = facet / 2;
  double m = 1.0;
  for (int d = 0; d < p.dim(); ++d) {
    if (d == axis) continue;
    double lo = INFINITY, hi = -INFINITY;
    for (int j : idx) {
      lo = std::min(lo, p.vertex(j)[d]);
      hi = std::max(hi, p.vertex(j)[d]);
    }
    m *= hi - lo;
  }
  return m;
}

}  // namespace

TEST_CASE("grid over [-10,10]^2 at 20x20 has 400 unit cells") {
  const auto part = build_grid_partition(box({-10, -10}, {10, 10}), {20, 20});
  CHECK(part.num_cells() == 400);
  for (CellId id = 0; id < part.num_cells(); ++id) {
    const Box b = part.cell(id).as_box();
    CHECK((b.hi - b.lo).isApprox(Vec::Ones(2)));
  }
  // dimension 0 varies fastest
  CHECK(part.cell(1).as_box().lo.isApprox(vec({-9, -10})));
  CHECK(part.cell(20).as_box().lo.isApprox(vec({-10, -9})));
}

TEST_CASE("single unit cell combinatorics") {
  const auto part = build_grid_partition(unit_box(2), {1, 1});
  REQUIRE(part.num_cells() == 1);
  const auto& c = part.cell(0);
  CHECK(c.num_facets() == 4);
  CHECK(c.num_vertices() == 4);
  for (int j = 0; j < 4; ++j) CHECK(c.vertex_facets(j).size() == 2);
  for (int i = 0; i < 4; ++i) CHECK(c.facet_vertices(i).size() == 2);
}

TEST_CASE("two cells share one facet with opposing normals") {
  const auto part = build_grid_partition(box({0, 0}, {2, 1}), {2, 1});
  const auto fa = common_facet(part, 0, 1);
  const auto fb = common_facet(part, 1, 0);
  REQUIRE(fa);
  REQUIRE(fb);
  CHECK(part.cell(0).normal(*fa).isApprox(vec({1, 0})));
  CHECK(part.cell(1).normal(*fb).isApprox(vec({-1, 0})));
  CHECK(part.cell(0).offset(*fa) == doctest::Approx(1.0));
}

TEST_CASE("cell bounds follow the index formula") {
  const Box b = box({-1, 2, 0}, {3, 5, 1});
  const auto part = build_grid_partition(b, {4, 3, 2});
  const Vec w = (b.hi - b.lo).cwiseQuotient(vec({4, 3, 2}));
  for (CellId id = 0; id < part.num_cells(); ++id) {
    const auto mi = part.multi_index(id);
    CHECK(part.cell_id(mi) == id);
    const Box cb = part.cell(id).as_box();
    for (int d = 0; d < 3; ++d) {
      CHECK(cb.lo[d] == doctest::Approx(b.lo[d] + mi[d] * w[d]).epsilon(1e-12));
      CHECK(cb.hi[d] == doctest::Approx(b.lo[d] + (mi[d] + 1) * w[d]).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate bounds are rejected") {
  CHECK_THROWS_AS(build_grid_partition(box({0, 0}, {0, 1}), {1, 1}), InvalidDomainError);
  CHECK_THROWS_AS(build_grid_partition(box({1, 0}, {0, 1}), {1, 1}), InvalidDomainError);
  CHECK_THROWS_AS(build_grid_partition(unit_box(2), {0, 1}), InvalidDomainError);
}

TEST_CASE("common_facet on grid neighbors") {
  const auto part = build_grid_partition(box({0, 0}, {3, 3}), {3, 3});
  SUBCASE("horizontal neighbors") {
    const auto f = common_facet(part, 4, 5);
    REQUIRE(f);
    CHECK(part.cell(4).normal(*f).isApprox(vec({1, 0})));
  }
  SUBCASE("diagonal neighbors") { CHECK_FALSE(common_facet(part, 4, 8)); }
  SUBCASE("same cell") { CHECK_FALSE(common_facet(part, 4, 4)); }
  SUBCASE("far apart") { CHECK_FALSE(common_facet(part, 0, 2)); }
  SUBCASE("symmetry and antiparallel normals") {
    for (CellId a = 0; a < part.num_cells(); ++a) {
      for (CellId b = 0; b < part.num_cells(); ++b) {
        const auto fab = common_facet(part, a, b);
        const auto fba = common_facet(part, b, a);
        CHECK(fab.has_value() == fba.has_value());
        if (fab) CHECK((part.cell(a).normal(*fab) + part.cell(b).normal(*fba)).norm() < 1e-12);
      }
    }
  }
  SUBCASE("neighbors agree with common_facet") {
    for (CellId a = 0; a < part.num_cells(); ++a) {
      for (CellId b : part.neighbors(a)) CHECK(common_facet(part, a, b));
    }
  }
}

TEST_CASE("locate") {
  const auto one = build_grid_partition(unit_box(2), {1, 1});
  CHECK(locate(one, vec({0.5, 0.5})) == 0);

  const auto two = build_grid_partition(box({0, 0}, {2, 1}), {2, 1});
  CHECK(locate(two, vec({1.0, 0.5})) == 1);
  CHECK(locate(two, vec({2.0, 1.0})) == 1);
  CHECK(locate(two, vec({0.0, 0.0})) == 0);

  const auto big = build_grid_partition(box({-10, -10}, {10, 10}), {20, 20});
  CHECK_THROWS_AS(locate(big, vec({11, 0})), OutOfDomainError);
  for (CellId id = 0; id < big.num_cells(); ++id) CHECK(locate(big, big.center(id)) == id);
}

TEST_CASE("polytope invariants on grid cells") {
  const auto part = build_grid_partition(box({-2, -1, 0}, {2, 1, 3}), {2, 3, 2});
  for (CellId id = 0; id < part.num_cells(); ++id) {
    const auto& p = part.cell(id);
    for (int i = 0; i < p.num_facets(); ++i) {
      CHECK(std::abs(p.normal(i).norm() - 1.0) <= 1e-12);
      for (int j : p.facet_vertices(i)) {
        const auto& w = p.vertex_facets(j);
        CHECK(std::find(w.begin(), w.end(), i) != w.end());
      }
    }
    for (int j = 0; j < p.num_vertices(); ++j) {
      CHECK(p.contains(p.vertex(j)));
      for (int i : p.vertex_facets(j)) {
        const auto& v = p.facet_vertices(i);
        CHECK(std::find(v.begin(), v.end(), j) != v.end());
      }
    }
    // closed-surface identity
    Vec sum = Vec::Zero(p.dim());
    for (int i = 0; i < p.num_facets(); ++i) sum += facet_measure(p, i) * p.normal(i);
    CHECK(sum.norm() <= 1e-9);
  }
}

TEST_CASE("general polytope normalizes normals and rejects bad vertices") {
  std::vector<Halfspace> hs = {{vec({-2, 0}), 0}, {vec({0, -3}), 0}, {vec({1, 1}), 1}};
  const Polytope tri(hs, {vec({0, 0}), vec({1, 0}), vec({0, 1})});
  CHECK(tri.normal(0).isApprox(vec({-1, 0})));
  CHECK(tri.offset(2) == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(tri.facet_vertices(2) == std::vector<int>{1, 2});
  CHECK_FALSE(tri.is_box());
  CHECK_THROWS_AS(Polytope(hs, {vec({0, 0}), vec({2, 0}), vec({0, 1})}), InvalidDomainError);
  CHECK_THROWS_AS(triangulate(tri), UnsupportedGeometryError);
}

TEST_CASE("triangulation") {
  SUBCASE("unit square splits along the diagonal from vertex 0") {
    const auto s = triangulate(unit_square());
    REQUIRE(s.size() == 2);
    for (const auto& t : s) {
      CHECK(simplex_measure(unit_square(), t) == doctest::Approx(0.5));
      CHECK(t.vertex_indices.front() == 0);
      CHECK(t.vertex_indices.back() == 3);
    }
  }
  SUBCASE("unit cube gives six tetrahedra of volume 1/6") {
    const auto cube = make_box(unit_box(3));
    const auto s = triangulate(cube);
    REQUIRE(s.size() == 6);
    for (const auto& t : s) CHECK(simplex_measure(cube, t) == doctest::Approx(1.0 / 6.0));
  }
  SUBCASE("measures sum to the box measure") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = rng.integer(1, 4);
      const Vec lo = rng.vector(n, -5, 5);
      const Vec hi = lo + rng.vector(n, 0.1, 3);
      const auto cell = make_box({lo, hi});
      double total = 0.0;
      for (const auto& t : triangulate(cell)) total += simplex_measure(cell, t);
      const double expected = (hi - lo).prod();
      CHECK(std::abs(total - expected) <= 1e-9 * expected);
    }
  }
  SUBCASE("simplices are interior-disjoint") {
    // Random points in the cube fall strictly inside exactly one simplex.
    const auto cube = make_box(unit_box(3));
    const auto s = triangulate(cube);
    Rng rng(3);
    for (int k = 0; k < 500; ++k) {
      const Vec x = rng.vector(3, 0, 1);
      int inside = 0;
      for (const auto& t : s) {
        if (barycentric(cube, t, x).minCoeff() > 1e-9) ++inside;
      }
      CHECK(inside == 1);
    }
  }
}
