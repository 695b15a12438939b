#include "pwanav/reach.hpp"

#include <cmath>
#include <limits>

namespace pwanav::reach {

using lincon::decide_feasibility;

std::vector<SignPattern> all_sign_patterns(int m) {
  std::vector<SignPattern> out;
  out.reserve(std::size_t{1} << m);
  for (int k = 0; k < (1 << m); ++k) {
    SignPattern p(m);
    for (int i = 0; i < m; ++i) p[i] = (k >> i) & 1 ? Sign::NonPositive : Sign::Positive;
    out.push_back(std::move(p));
  }
  return out;
}

double operator_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

ModelDeviationBounds deviation_bounds(const AffineModel& ref_model, const Vec& x1, const Vec& x2,
                                      double lipschitz_df, double lipschitz_g) {
  const double dist = (x2 - x1).norm();
  ModelDeviationBounds b;
  b.eps_A = lipschitz_df * dist;
  b.eps_B = lipschitz_g * dist;
  b.eps_c = 2.0 * operator_norm(ref_model.A) * dist + 0.5 * lipschitz_df * dist * dist +
            lipschitz_df * dist * x2.norm();
  return b;
}

namespace {

// Facets whose rows are non-strict at vertex j: those containing v_j other
// than the exit facet. When v_j is off the exit facet the exclusion is a no-op.
std::vector<int> blocking_facets(const Polytope& cell, int exit_facet, int vertex) {
  std::vector<int> out;
  for (int i : cell.vertex_facets(vertex)) {
    if (i != exit_facet) out.push_back(i);
  }
  return out;
}

void check_indices(const Polytope& cell, int exit_facet, int vertex) {
  if (exit_facet < 0 || exit_facet >= cell.num_facets()) {
    throw PreconditionError("exit facet index out of range");
  }
  if (vertex < 0 || vertex >= cell.num_vertices()) {
    throw PreconditionError("vertex index out of range");
  }
}

LinearConstraintSystem empty_system(const Box& control_box) {
  LinearConstraintSystem sys;
  sys.dim = control_box.dim();
  sys.box = control_box;
  return sys;
}

enum class Perturbation { Tighten, Loosen };

// Shared builder for the tightened (robust) and loosened (expanded) branch
// systems. For the strict exit row the input coefficient is shifted by
// ∓ s_k ε_B ‖n‖ and the right-hand side by ±‖n‖(ε_A‖v‖ + ε_c); blocking rows
// get the opposite shifts.
LinearConstraintSystem perturbed_system(const Polytope& cell, int exit_facet, int vertex,
                                        const AffineModel& ref, const ModelDeviationBounds& b,
                                        const SignPattern& pattern, const Box& control_box,
                                        Perturbation mode) {
  check_indices(cell, exit_facet, vertex);
  const int m = control_box.dim();
  if (static_cast<int>(pattern.size()) != m) throw PreconditionError("sign pattern length mismatch");

  Vec signs(m);
  for (int k = 0; k < m; ++k) signs[k] = pattern[k] == Sign::Positive ? 1.0 : -1.0;

  const Vec& v = cell.vertex(vertex);
  const Vec drift = ref.A * v + ref.c;
  const double tight = mode == Perturbation::Tighten ? 1.0 : -1.0;

  auto shift = [&](int facet) {
    const double nn = cell.normal(facet).norm();
    return nn * (b.eps_A * v.norm() + b.eps_c);
  };
  auto input_shift = [&](int facet) -> Vec {
    return signs * (b.eps_B * cell.normal(facet).norm());
  };

  LinearConstraintSystem sys = empty_system(control_box);
  {
    const Vec& n = cell.normal(exit_facet);
    sys.add_greater(Vec(ref.B.transpose() * n) - tight * input_shift(exit_facet),
                    -n.dot(drift) + tight * shift(exit_facet));
  }
  for (int i : blocking_facets(cell, exit_facet, vertex)) {
    const Vec& n = cell.normal(i);
    sys.add_less_eq(Vec(ref.B.transpose() * n) + tight * input_shift(i),
                    -n.dot(drift) - tight * shift(i));
  }
  for (int k = 0; k < m; ++k) {
    Vec e = Vec::Zero(m);
    e[k] = 1.0;
    if (pattern[k] == Sign::Positive) {
      sys.add_greater(e, 0.0);
    } else {
      sys.add_less_eq(e, 0.0);
    }
  }
  return sys;
}

}  // namespace

LinearConstraintSystem vertex_constraint_system(const Polytope& cell, int exit_facet,
                                                int vertex, const AffineModel& model,
                                                const Box& control_box) {
  check_indices(cell, exit_facet, vertex);
  const Vec& v = cell.vertex(vertex);
  const Vec drift = model.A * v + model.c;

  LinearConstraintSystem sys = empty_system(control_box);
  const Vec& n_exit = cell.normal(exit_facet);
  sys.add_greater(model.B.transpose() * n_exit, -n_exit.dot(drift));
  for (int i : blocking_facets(cell, exit_facet, vertex)) {
    const Vec& n = cell.normal(i);
    sys.add_less_eq(model.B.transpose() * n, -n.dot(drift));
  }
  return sys;
}

ReachDecision decide_exit_facet(const Polytope& cell, int exit_facet, const AffineModel& model,
                                const Box& control_box) {
  std::vector<Vec> witnesses;
  witnesses.reserve(cell.num_vertices());
  for (int j = 0; j < cell.num_vertices(); ++j) {
    auto res = decide_feasibility(vertex_constraint_system(cell, exit_facet, j, model, control_box));
    if (!res.feasible) return {EdgeStatus::Absent, std::nullopt};
    witnesses.push_back(std::move(*res.witness));
  }
  return {EdgeStatus::Exists, std::move(witnesses)};
}

LinearConstraintSystem robust_vertex_system(const Polytope& cell, int exit_facet, int vertex,
                                            const AffineModel& ref_model,
                                            const ModelDeviationBounds& bounds,
                                            const SignPattern& pattern, const Box& control_box) {
  return perturbed_system(cell, exit_facet, vertex, ref_model, bounds, pattern, control_box,
                          Perturbation::Tighten);
}

LinearConstraintSystem expanded_vertex_system(const Polytope& cell, int exit_facet, int vertex,
                                              const AffineModel& ref_model,
                                              const ModelDeviationBounds& bounds,
                                              const SignPattern& pattern,
                                              const Box& control_box) {
  return perturbed_system(cell, exit_facet, vertex, ref_model, bounds, pattern, control_box,
                          Perturbation::Loosen);
}

ReachDecision predict_exit_facet(const Polytope& cell, int exit_facet,
                                 const AffineModel& ref_model,
                                 const ModelDeviationBounds& bounds, const Box& control_box) {
  const auto patterns = all_sign_patterns(control_box.dim());
  std::vector<Vec> witnesses;
  bool all_robust = true;

  for (int j = 0; j < cell.num_vertices(); ++j) {
    if (all_robust) {
      std::optional<Vec> found;
      for (const auto& p : patterns) {
        auto res = decide_feasibility(
            robust_vertex_system(cell, exit_facet, j, ref_model, bounds, p, control_box));
        if (res.feasible) {
          found = std::move(res.witness);
          break;
        }
      }
      if (found) {
        witnesses.push_back(std::move(*found));
        continue;
      }
      all_robust = false;
    }
    // Tightened sets are contained in loosened ones, so only vertices without a
    // robust witness need the loosened check.
    bool expanded = false;
    for (const auto& p : patterns) {
      if (decide_feasibility(
              expanded_vertex_system(cell, exit_facet, j, ref_model, bounds, p, control_box))
              .feasible) {
        expanded = true;
        break;
      }
    }
    if (!expanded) return {EdgeStatus::Absent, std::nullopt};
  }
  if (all_robust) return {EdgeStatus::Exists, std::move(witnesses)};
  return {EdgeStatus::Uncertain, std::nullopt};
}

namespace {

Mat interpolation_matrix(const Polytope& cell, const geometry::Simplex& s) {
  const int n = cell.dim();
  Mat M(n + 1, n + 1);
  for (int k = 0; k <= n; ++k) {
    M.col(k).head(n) = cell.vertex(s.vertex_indices.at(k));
    M(n, k) = 1.0;
  }
  return M;
}

ControllerLaw solve_piece(const Polytope& cell, const std::vector<Vec>& witnesses,
                          const geometry::Simplex& s) {
  const int n = cell.dim();
  const int m = static_cast<int>(witnesses.front().size());
  const Mat M = interpolation_matrix(cell, s);
  Eigen::FullPivLU<Mat> lu(M.transpose());
  if (lu.rank() < n + 1) throw SynthesisError("degenerate simplex in interpolation");

  Mat U(m, n + 1);
  ControllerLaw law;
  law.simplex = s;
  for (int k = 0; k <= n; ++k) {
    U.col(k) = witnesses.at(s.vertex_indices[k]);
    law.vertex_inputs.push_back(U.col(k));
  }
  const Mat Fg = lu.solve(U.transpose()).transpose();
  law.F = Fg.leftCols(n);
  law.g = Fg.col(n);
  return law;
}

void check_witnesses(const Polytope& cell, const std::vector<Vec>& witnesses) {
  if (static_cast<int>(witnesses.size()) != cell.num_vertices() || witnesses.empty()) {
    throw PreconditionError("need one witness input per cell vertex");
  }
}

}  // namespace

ControllerLaw synthesize_controller(const Polytope& cell, const std::vector<Vec>& witnesses,
                                    const Vec& x0) {
  check_witnesses(cell, witnesses);
  if (!cell.contains(x0)) throw PreconditionError("x0 lies outside the cell");
  const auto simplices = geometry::triangulate(cell);
  for (const auto& s : simplices) {
    if (geometry::barycentric(cell, s, x0).minCoeff() >= -kGeomTol) {
      return solve_piece(cell, witnesses, s);
    }
  }
  throw SynthesisError("no simplex of the triangulation contains x0");
}

PiecewiseControllerLaw::PiecewiseControllerLaw(const Polytope& cell,
                                               const std::vector<Vec>& witnesses)
    : cell_(cell) {
  check_witnesses(cell, witnesses);
  for (const auto& s : geometry::triangulate(cell)) pieces_.push_back(solve_piece(cell, witnesses, s));
}

int PiecewiseControllerLaw::piece_index(const Vec& x) const {
  int best = 0;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < static_cast<int>(pieces_.size()); ++k) {
    const double lo = geometry::barycentric(cell_, pieces_[k].simplex, x).minCoeff();
    if (lo >= -kGeomTol) return k;
    if (lo > best_min) {
      best_min = lo;
      best = k;
    }
  }
  return best;
}

Vec PiecewiseControllerLaw::operator()(const Vec& x) const { return pieces_[piece_index(x)](x); }

double t0_upper_bound(const Polytope& cell, int exit_facet, const AffineModel& model,
                      const std::vector<Vec>& witnesses, const EntryAlpha& alpha) {
  check_witnesses(cell, witnesses);
  const Vec& n = cell.normal(exit_facet);
  double beta = -std::numeric_limits<double>::infinity();
  double lowest = std::numeric_limits<double>::infinity();
  double c1 = std::numeric_limits<double>::infinity();
  for (int j = 0; j < cell.num_vertices(); ++j) {
    const Vec& v = cell.vertex(j);
    beta = std::max(beta, n.dot(v));
    lowest = std::min(lowest, n.dot(v));
    c1 = std::min(c1, n.dot(model.velocity(v, witnesses[j])));
  }
  if (!(c1 > lincon::kTolStrict)) {
    throw UnboundedTransitError("exit-facet velocity is not positive at every vertex");
  }
  const double a = alpha.entry_state ? n.dot(*alpha.entry_state) : lowest;
  return (beta - a) / c1;
}

}  // namespace pwanav::reach
