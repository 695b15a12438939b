#include <doctest.h>

#include <cmath>

#include "pwanav/reach.hpp"
#include "support.hpp"

using namespace pwanav;
using namespace pwanav::reach;
using namespace testing_support;
using lincon::Relation;

namespace {

const Box kPu = box({-5, -5}, {5, 5});

AffineModel random_model(Rng& rng) {
  return affine(rng.matrix(2, 2, -1, 1), rng.matrix(2, 2, -1.5, 1.5), rng.vector(2, -4, 4));
}

bool satisfies(const LinearConstraintSystem& s, const Vec& u, double strict_tol = 0.0) {
  if (!s.box.contains(u, 0.0)) return false;
  return lincon::strict_slack(s, u) > strict_tol && lincon::nonstrict_violation(s, u) <= 0.0;
}

// Vertex index of the unit square at (x, y).
int corner(int x, int y) { return x + 2 * y; }

// Random matrix with spectral norm at most r.
Mat within_norm(Rng& rng, int rows, int cols, double r) {
  Mat m = rng.matrix(rows, cols, -1, 1);
  const double nrm = operator_norm(m);
  return nrm > 0 ? Mat(m * (rng.uniform(0, 1) * r / nrm)) : m;
}

Vec within_ball(Rng& rng, int n, double r) {
  Vec v = rng.vector(n, -1, 1);
  return v * (rng.uniform(0, 1) * r / v.norm());
}

}  // namespace

TEST_CASE("sign patterns") {
  const auto p = all_sign_patterns(2);
  REQUIRE(p.size() == 4);
  CHECK(p[0] == SignPattern{Sign::Positive, Sign::Positive});
  CHECK(p[3] == SignPattern{Sign::NonPositive, Sign::NonPositive});
  CHECK(all_sign_patterns(3).size() == 8);
}

TEST_CASE("operator norm") {
  Mat m(2, 2);
  m << 3, 0, 0, -4;
  CHECK(operator_norm(m) == doctest::Approx(4.0));
  Mat r(2, 3);
  r << 1, 2, 2, 0, 0, 0;
  CHECK(operator_norm(r) == doctest::Approx(3.0));
}

TEST_CASE("deviation bounds") {
  Mat A(2, 2);
  A << 0.2, 0, 0, 0.1;
  const auto ref = affine(A, Mat::Identity(2, 2), Vec::Zero(2));
  SUBCASE("coincident centers") {
    const auto b = deviation_bounds(ref, vec({3, 4}), vec({3, 4}), 0.03, 0.03);
    CHECK(b.eps_A == 0.0);
    CHECK(b.eps_B == 0.0);
    CHECK(b.eps_c == 0.0);
  }
  SUBCASE("unit distance with the experiment constants") {
    const auto b = deviation_bounds(ref, vec({0, 0}), vec({0.6, 0.8}), 0.03, 0.03);
    CHECK(b.eps_A == doctest::Approx(0.03));
    CHECK(b.eps_B == doctest::Approx(0.03));
  }
  SUBCASE("eps_c by substitution") {
    const auto b = deviation_bounds(ref, vec({9, 0}), vec({10, 0}), 0.03, 0.03);
    CHECK(b.eps_c == doctest::Approx(0.715).epsilon(1e-12));
  }
}

TEST_CASE("deviation bounds hold for the terrain model") {
  const auto field = dynamics::terrain_model();
  Rng rng(77);
  for (int k = 0; k < 200; ++k) {
    const Vec x1 = rng.vector(2, -10, 10);
    const Vec x2 = rng.vector(2, -10, 10);
    const auto m1 = dynamics::linearize_at(*field, x1);
    const auto m2 = dynamics::linearize_at(*field, x2);
    const auto b = deviation_bounds(m1, x1, x2, 0.03, 0.03);
    CHECK(operator_norm(m2.A - m1.A) <= b.eps_A + 1e-9);
    CHECK(operator_norm(m2.B - m1.B) <= b.eps_B + 1e-9);
    CHECK((m2.c - m1.c).norm() <= b.eps_c + 1e-9);
  }
}

TEST_CASE("vertex constraint systems read off the normals") {
  const auto cell = unit_square();
  const int right = upper_facet(0);
  const auto si = single_integrator(2);

  SUBCASE("vertex on the exit facet") {
    const auto s = vertex_constraint_system(cell, right, corner(1, 1), si, kPu);
    REQUIRE(s.rows.size() == 2);
    CHECK(s.rows[0].relation == Relation::StrictGreater);
    CHECK(s.rows[0].coeffs == vec({1, 0}));
    CHECK(s.rows[0].rhs == 0.0);
    CHECK(s.rows[1].relation == Relation::NonStrictLessEq);
    CHECK(s.rows[1].coeffs == vec({0, 1}));
    CHECK(s.rows[1].rhs == 0.0);
    CHECK(satisfies(s, vec({1, 0})));
  }
  SUBCASE("vertex off the exit facet") {
    const auto s = vertex_constraint_system(cell, right, corner(0, 0), si, kPu);
    REQUIRE(s.rows.size() == 3);
    CHECK(s.rows[0].coeffs == vec({1, 0}));
    CHECK(s.rows[1].coeffs == vec({-1, 0}));
    CHECK(s.rows[2].coeffs == vec({0, -1}));
    CHECK(satisfies(s, vec({1, 0})));
  }
  SUBCASE("drift that the box can just overcome") {
    const auto drifting = affine(Mat::Zero(2, 2), Mat::Identity(2, 2), vec({-4.5, -4.5}));
    const auto s = vertex_constraint_system(cell, right, corner(1, 0), drifting, kPu);
    REQUIRE(s.rows.size() == 2);
    CHECK(s.rows[0].coeffs == vec({1, 0}));
    CHECK(s.rows[0].rhs == doctest::Approx(4.5));
    // the bottom facet row -(u2 - 4.5) <= 0 asks the input to cancel the drift
    CHECK(s.rows[1].coeffs == vec({0, -1}));
    CHECK(s.rows[1].rhs == doctest::Approx(-4.5));
    CHECK(satisfies(s, vec({5, 5})));
    CHECK_FALSE(satisfies(s, vec({5, 0})));
    CHECK(lincon::decide_feasibility(s).feasible);
    const auto tight = vertex_constraint_system(cell, right, corner(1, 0), drifting,
                                                box({-4, -4}, {4, 4}));
    CHECK_FALSE(lincon::decide_feasibility(tight).feasible);
  }
}

TEST_CASE("definitive decisions") {
  const auto cell = unit_square();
  for (int f = 0; f < 4; ++f) {
    const auto d = decide_exit_facet(cell, f, single_integrator(2), kPu);
    CHECK(d.status == EdgeStatus::Exists);
    REQUIRE(d.witnesses);
    CHECK(d.witnesses->size() == 4);
    for (int j = 0; j < 4; ++j) {
      CHECK(satisfies(vertex_constraint_system(cell, f, j, single_integrator(2), kPu),
                      (*d.witnesses)[j], lincon::kTolStrict));
    }
    const auto still = affine(Mat::Zero(2, 2), Mat::Zero(2, 2), Vec::Zero(2));
    const auto a = decide_exit_facet(cell, f, still, kPu);
    CHECK(a.status == EdgeStatus::Absent);
    CHECK_FALSE(a.witnesses);
  }
}

TEST_CASE("terrain decisions agree with input-grid sampling") {
  const auto field = dynamics::terrain_model();
  const auto part = geometry::build_grid_partition(box({-10, -10}, {10, 10}), {20, 20});
  Rng rng(2024);
  const double step = 0.05;
  for (int k = 0; k < 20; ++k) {
    const auto id = rng.integer(0, part.num_cells() - 1);
    const auto& cell = part.cell(id);
    const auto model = dynamics::linearize_at(*field, part.center(id));
    for (int f = 0; f < 4; ++f) {
      bool all_vertices = true;
      for (int j = 0; j < 4; ++j) {
        const auto sys = vertex_constraint_system(cell, f, j, model, kPu);
        bool grid = false;
        for (int a = 0; a <= 200 && !grid; ++a) {
          for (int b = 0; b <= 200 && !grid; ++b) {
            grid = satisfies(sys, vec({-5 + a * step, -5 + b * step}));
          }
        }
        const auto res = lincon::decide_feasibility(sys);
        CHECK(res.feasible == grid);
        all_vertices = all_vertices && grid;
      }
      CHECK((decide_exit_facet(cell, f, model, kPu).status == EdgeStatus::Exists) == all_vertices);
    }
  }
}

TEST_CASE("zero bounds reduce the branch systems to the nominal rows") {
  Rng rng(31);
  const auto cell = unit_square();
  const ModelDeviationBounds zero;
  for (int trial = 0; trial < 50; ++trial) {
    const auto model = random_model(rng);
    const int f = rng.integer(0, 3);
    const int j = rng.integer(0, 3);
    const auto nominal = vertex_constraint_system(cell, f, j, model, kPu);
    bool any = false;
    for (const auto& p : all_sign_patterns(2)) {
      const auto r = robust_vertex_system(cell, f, j, model, zero, p, kPu);
      const auto e = expanded_vertex_system(cell, f, j, model, zero, p, kPu);
      REQUIRE(r.rows.size() == nominal.rows.size() + 2);
      for (std::size_t k = 0; k < nominal.rows.size(); ++k) {
        CHECK(r.rows[k].coeffs == nominal.rows[k].coeffs);
        CHECK(r.rows[k].rhs == nominal.rows[k].rhs);
        CHECK(r.rows[k].relation == nominal.rows[k].relation);
        CHECK(e.rows[k].coeffs == nominal.rows[k].coeffs);
        CHECK(e.rows[k].rhs == nominal.rows[k].rhs);
      }
      const bool rf = lincon::decide_feasibility(r).feasible;
      CHECK(rf == lincon::decide_feasibility(e).feasible);
      any = any || rf;
    }
    // Inputs with a zero component sit in a u_k <= 0 branch, so the union of
    // the branches covers the whole box.
    CHECK(any == lincon::decide_feasibility(nominal).feasible);
  }
}

TEST_CASE("sign-pattern regions partition the control box") {
  const auto cell = unit_square();
  const auto si = single_integrator(2);
  const ModelDeviationBounds zero;
  Rng rng(4);
  const auto patterns = all_sign_patterns(2);
  for (int k = 0; k < 2000; ++k) {
    Vec u = rng.vector(2, -5, 5);
    if (k % 10 == 0) u[k % 2] = 0.0;
    int hits = 0;
    for (const auto& p : patterns) {
      const auto s = robust_vertex_system(cell, 1, 0, si, zero, p, kPu);
      // count only the sign rows
      bool ok = true;
      for (std::size_t r = s.rows.size() - 2; r < s.rows.size(); ++r) {
        const double lhs = s.rows[r].coeffs.dot(u);
        ok = ok && (s.rows[r].relation == Relation::StrictGreater ? lhs > 0 : lhs <= 0);
      }
      hits += ok;
    }
    CHECK(hits == 1);
  }
}

TEST_CASE("tightened, nominal and loosened sets are nested") {
  Rng rng(99);
  const auto cell = unit_square();
  const auto patterns = all_sign_patterns(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto ref = random_model(rng);
    const ModelDeviationBounds b{rng.uniform(0, 0.5), rng.uniform(0, 0.5), rng.uniform(0, 0.5)};
    // a model inside the bounds
    const auto other = affine(ref.A + within_norm(rng, 2, 2, b.eps_A),
                              ref.B + within_norm(rng, 2, 2, b.eps_B),
                              ref.c + within_ball(rng, 2, b.eps_c));
    const int f = rng.integer(0, 3);
    const int j = rng.integer(0, 3);
    const auto& p = patterns[rng.integer(0, 3)];
    const auto robust = robust_vertex_system(cell, f, j, ref, b, p, kPu);
    const auto expanded = expanded_vertex_system(cell, f, j, ref, b, p, kPu);
    const auto nominal = vertex_constraint_system(cell, f, j, ref, kPu);
    const auto perturbed = vertex_constraint_system(cell, f, j, other, kPu);
    // sign rows of the pattern, for the expanded comparison
    auto in_pattern = [&](const Vec& u) {
      for (int k = 0; k < 2; ++k) {
        if ((p[k] == Sign::Positive) != (u[k] > 0)) return false;
      }
      return true;
    };
    for (int s = 0; s < 100; ++s) {
      const Vec u = rng.vector(2, -5, 5);
      if (satisfies(robust, u)) {
        CHECK(satisfies(nominal, u));
        CHECK(satisfies(perturbed, u));
      }
      if (in_pattern(u) && (satisfies(nominal, u) || satisfies(perturbed, u))) {
        CHECK(satisfies(expanded, u));
      }
    }
  }
}

TEST_CASE("a loosened row can admit what the nominal one rejects") {
  const auto cell = unit_square();
  const auto drifting = affine(Mat::Zero(2, 2), Mat::Identity(2, 2), vec({-4.5, -4.5}));
  const Box small = box({-4, -4}, {4, 4});
  const int right = upper_facet(0);
  CHECK_FALSE(
      lincon::decide_feasibility(vertex_constraint_system(cell, right, corner(1, 0), drifting, small))
          .feasible);
  const ModelDeviationBounds b{0.0, 0.0, 1.0};
  const auto e = expanded_vertex_system(cell, right, corner(1, 0), drifting, b,
                                        {Sign::Positive, Sign::Positive}, small);
  CHECK(e.rows[0].rhs == doctest::Approx(3.5));
  CHECK(e.rows[1].rhs == doctest::Approx(-3.5));
  CHECK(lincon::decide_feasibility(e).feasible);
}

TEST_CASE("predictions") {
  const auto cell = unit_square();
  SUBCASE("zero bounds match the definitive decision") {
    Rng rng(5150);
    for (int trial = 0; trial < 200; ++trial) {
      const auto model = random_model(rng);
      const Box pu = trial % 2 ? kPu : box({-1, -1}, {1, 1});
      for (int f = 0; f < 4; ++f) {
        const auto p = predict_exit_facet(cell, f, model, {}, pu);
        CHECK(p.status != EdgeStatus::Uncertain);
        CHECK(p.status == decide_exit_facet(cell, f, model, pu).status);
      }
    }
  }
  SUBCASE("huge bounds leave every facet uncertain") {
    const ModelDeviationBounds huge{100, 100, 100};
    for (int f = 0; f < 4; ++f) {
      CHECK(predict_exit_facet(cell, f, single_integrator(2), huge, kPu).status ==
            EdgeStatus::Uncertain);
    }
  }
  SUBCASE("witnesses satisfy a tightened branch") {
    Rng rng(8);
    int exists = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto ref = random_model(rng);
      const ModelDeviationBounds b{rng.uniform(0, 0.2), rng.uniform(0, 0.2), rng.uniform(0, 0.2)};
      const int f = rng.integer(0, 3);
      const auto d = predict_exit_facet(cell, f, ref, b, kPu);
      if (d.status != EdgeStatus::Exists) continue;
      ++exists;
      for (int j = 0; j < 4; ++j) {
        bool any = false;
        for (const auto& p : all_sign_patterns(2)) {
          any = any || satisfies(robust_vertex_system(cell, f, j, ref, b, p, kPu),
                                 (*d.witnesses)[j], lincon::kTolStrict);
        }
        CHECK(any);
      }
    }
    CHECK(exists > 10);
  }
}

TEST_CASE("soundness against perturbed models") {
  const auto cell = unit_square();
  Rng rng(314);
  int decided = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto ref = random_model(rng);
    const ModelDeviationBounds b{rng.uniform(0, 0.5), rng.uniform(0, 0.5), rng.uniform(0, 0.5)};
    const auto other = affine(ref.A + within_norm(rng, 2, 2, b.eps_A),
                              ref.B + within_norm(rng, 2, 2, b.eps_B),
                              ref.c + within_ball(rng, 2, b.eps_c));
    const int f = rng.integer(0, 3);
    const auto pred = predict_exit_facet(cell, f, ref, b, kPu).status;
    const auto truth = decide_exit_facet(cell, f, other, kPu).status;
    if (pred != EdgeStatus::Uncertain) {
      ++decided;
      CHECK(pred == truth);
    }
  }
  CHECK(decided > 50);
}

TEST_CASE("monotonicity in the bounds") {
  const auto cell = unit_square();
  Rng rng(2718);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ref = random_model(rng);
    const ModelDeviationBounds small{rng.uniform(0, 0.3), rng.uniform(0, 0.3), rng.uniform(0, 0.3)};
    const ModelDeviationBounds big{small.eps_A + rng.uniform(0, 0.3),
                                   small.eps_B + rng.uniform(0, 0.3),
                                   small.eps_c + rng.uniform(0, 0.3)};
    const int f = rng.integer(0, 3);
    const auto at_small = predict_exit_facet(cell, f, ref, small, kPu).status;
    const auto at_big = predict_exit_facet(cell, f, ref, big, kPu).status;
    if (at_big == EdgeStatus::Exists) CHECK(at_small == EdgeStatus::Exists);
    if (at_big == EdgeStatus::Absent) CHECK(at_small == EdgeStatus::Absent);
  }
}

TEST_CASE("controller synthesis") {
  const auto cell = unit_square();
  SUBCASE("equal witnesses give a constant law") {
    const std::vector<Vec> w(4, vec({0.3, -1.2}));
    const auto law = synthesize_controller(cell, w, vec({0.2, 0.7}));
    CHECK(law.F.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((law.g - vec({0.3, -1.2})).norm() <= 1e-12);
  }
  SUBCASE("witnesses equal to the vertices give the identity") {
    std::vector<Vec> w;
    for (int j = 0; j < 4; ++j) w.push_back(cell.vertex(j));
    for (const Vec& x0 : {vec({0.8, 0.1}), vec({0.1, 0.8})}) {
      const auto law = synthesize_controller(cell, w, x0);
      CHECK((law.F - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
      CHECK(law.g.norm() <= 1e-12);
    }
  }
  SUBCASE("simplex selection and vertex residuals") {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = rng.integer(2, 3);
      const Vec lo = rng.vector(n, -5, 5);
      const auto c = geometry::make_box({lo, lo + rng.vector(n, 0.2, 2)});
      std::vector<Vec> w;
      for (int j = 0; j < c.num_vertices(); ++j) w.push_back(rng.vector(2, -5, 5));
      const Vec x0 = lo + (c.as_box().hi - lo).cwiseProduct(rng.vector(n, 0, 1));
      const auto law = synthesize_controller(c, w, x0);
      CHECK(geometry::barycentric(c, law.simplex, x0).minCoeff() >= -1e-9);
      for (std::size_t k = 0; k < law.simplex.vertex_indices.size(); ++k) {
        const int j = law.simplex.vertex_indices[k];
        CHECK((law(c.vertex(j)) - w[j]).norm() <= 1e-9);
        CHECK(law.vertex_inputs[k] == w[j]);
      }
    }
  }
  SUBCASE("piecewise law interpolates every vertex and is continuous") {
    Rng rng(13);
    std::vector<Vec> w;
    for (int j = 0; j < 4; ++j) w.push_back(rng.vector(2, -5, 5));
    const PiecewiseControllerLaw law(cell, w);
    CHECK(law.pieces().size() == 2);
    for (int j = 0; j < 4; ++j) CHECK((law(cell.vertex(j)) - w[j]).norm() <= 1e-9);
    // on the shared diagonal both pieces agree
    for (double s : {0.1, 0.5, 0.9}) {
      const Vec x = vec({s, s});
      CHECK((law.pieces()[0](x) - law.pieces()[1](x)).norm() <= 1e-9);
    }
  }
  SUBCASE("preconditions") {
    const std::vector<Vec> w(3, vec({0, 0}));
    CHECK_THROWS_AS(synthesize_controller(cell, w, vec({0.5, 0.5})), PreconditionError);
    const std::vector<Vec> w4(4, vec({0, 0}));
    CHECK_THROWS_AS(synthesize_controller(cell, w4, vec({1.5, 0.5})), PreconditionError);
  }
}

TEST_CASE("transit time bound") {
  const auto cell = unit_square();
  const std::vector<Vec> w(4, vec({1, 0}));
  const auto si = single_integrator(2);
  const int right = upper_facet(0);
  CHECK(t0_upper_bound(cell, right, si, w, EntryAlpha::at(vec({0, 0.3}))) == doctest::Approx(1.0));
  CHECK(t0_upper_bound(cell, right, si, w, EntryAlpha::at(vec({0.5, 0.3}))) == doctest::Approx(0.5));
  CHECK(t0_upper_bound(cell, right, si, w, EntryAlpha::worst_case()) == doctest::Approx(1.0));
  const std::vector<Vec> bad(4, vec({0, 1}));
  CHECK_THROWS_AS(t0_upper_bound(cell, right, si, bad, EntryAlpha::worst_case()),
                  UnboundedTransitError);
}

TEST_CASE("simulated transits respect the bound") {
  const auto cell = unit_square();
  Rng rng(42);
  int cases = 0;
  for (int trial = 0; trial < 300 && cases < 30; ++trial) {
    const auto model = random_model(rng);
    const int f = rng.integer(0, 3);
    const auto d = decide_exit_facet(cell, f, model, kPu);
    if (d.status != EdgeStatus::Exists) continue;
    ++cases;
    const dynamics::AffineField env(model.A, model.B, model.c, 1, 1);
    const Vec x0 = rng.vector(2, 0, 1);
    const PiecewiseControllerLaw law(cell, *d.witnesses);
    const double bound = t0_upper_bound(cell, f, model, *d.witnesses, EntryAlpha::at(x0));
    const auto rec = dynamics::simulate_closed_loop(env, law, cell, x0, 1e-3, bound + 1.0, kPu);
    REQUIRE(rec.outcome == dynamics::ExitOutcome::ExitedFacet);
    CHECK(*rec.exit_facet == f);
    CHECK(rec.exit_time <= bound + 1e-3);
    CHECK(cell.normal(f).dot(env.velocity(rec.exit_state, law(rec.exit_state))) > 0.0);
  }
  CHECK(cases == 30);
}
