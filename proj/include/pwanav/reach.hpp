#pragma once

#include <optional>
#include <vector>

#include "pwanav/common.hpp"
#include "pwanav/dynamics.hpp"
#include "pwanav/geometry.hpp"
#include "pwanav/lincon.hpp"

namespace pwanav::reach {

using dynamics::AffineModel;
using geometry::Polytope;
using lincon::LinearConstraintSystem;

/// Radii bounding ‖A2 - A1‖, ‖B2 - B1‖ and ‖c2 - c1‖ (operator norms) between
/// two linearizations of the same field.
struct ModelDeviationBounds {
  double eps_A = 0.0;
  double eps_B = 0.0;
  double eps_c = 0.0;
};

enum class EdgeStatus { Exists, Absent, Uncertain };

struct ReachDecision {
  EdgeStatus status = EdgeStatus::Absent;
  /// One input per cell vertex; present iff status == Exists.
  std::optional<std::vector<Vec>> witnesses;
};

/// Sign of each control component selecting one branch system. sign(0) is
/// NonPositive.
enum class Sign { Positive, NonPositive };
using SignPattern = std::vector<Sign>;

/// All 2^m patterns; pattern k takes Positive in component i iff bit i of k is clear.
std::vector<SignPattern> all_sign_patterns(int m);

/// Spectral norm (largest singular value).
double operator_norm(const Mat& m);

ModelDeviationBounds deviation_bounds(const AffineModel& ref_model, const Vec& x1, const Vec& x2,
                                      double lipschitz_df, double lipschitz_g);

/// Constraints on the input u_j at vertex j for leaving through exit_facet:
///   n_exit·(A v_j + B u_j + c) > 0
///   n_i·(A v_j + B u_j + c) <= 0 for every other facet i containing v_j
///   u_j in the control box.
LinearConstraintSystem vertex_constraint_system(const Polytope& cell, int exit_facet,
                                                int vertex, const AffineModel& model,
                                                const Box& control_box);

/// Definitive decision under a known model: Exists iff every vertex system is
/// feasible. Never returns Uncertain.
ReachDecision decide_exit_facet(const Polytope& cell, int exit_facet, const AffineModel& model,
                                const Box& control_box);

/// Tightened branch system: any u feasible here is feasible for every model
/// within `bounds` of `ref_model`.
LinearConstraintSystem robust_vertex_system(const Polytope& cell, int exit_facet, int vertex,
                                            const AffineModel& ref_model,
                                            const ModelDeviationBounds& bounds,
                                            const SignPattern& pattern, const Box& control_box);

/// Loosened branch system: any u feasible for some model within `bounds` of
/// `ref_model` (with this sign pattern) is feasible here.
LinearConstraintSystem expanded_vertex_system(const Polytope& cell, int exit_facet, int vertex,
                                              const AffineModel& ref_model,
                                              const ModelDeviationBounds& bounds,
                                              const SignPattern& pattern,
                                              const Box& control_box);

/// Predictive decision for a cell whose own model is unknown. Exists iff every
/// vertex has a feasible tightened branch; Absent iff some vertex has no
/// feasible loosened branch; Uncertain otherwise.
ReachDecision predict_exit_facet(const Polytope& cell, int exit_facet,
                                 const AffineModel& ref_model,
                                 const ModelDeviationBounds& bounds, const Box& control_box);

/// u = F x + g interpolating the witnesses on one simplex of the cell.
struct ControllerLaw {
  Mat F;
  Vec g;
  geometry::Simplex simplex;
  std::vector<Vec> vertex_inputs;

  Vec operator()(const Vec& x) const { return F * x + g; }
};

/// Solves [F | g] [V; 1] = Ū on the triangulation simplex containing x0 (lowest
/// index on ties). Throws SynthesisError on a singular interpolation matrix.
ControllerLaw synthesize_controller(const Polytope& cell, const std::vector<Vec>& witnesses,
                                    const Vec& x0);

/// One affine law per simplex of the cell's triangulation. Evaluation uses the
/// simplex containing the state, so the applied input is the continuous
/// piecewise-affine interpolation of the vertex witnesses over the whole cell.
class PiecewiseControllerLaw {
 public:
  PiecewiseControllerLaw(const Polytope& cell, const std::vector<Vec>& witnesses);

  Vec operator()(const Vec& x) const;
  const std::vector<ControllerLaw>& pieces() const { return pieces_; }
  /// Simplex index used at x.
  int piece_index(const Vec& x) const;

 private:
  Polytope cell_;
  std::vector<ControllerLaw> pieces_;
};

/// Where the transit starts: a known entry state, or the worst case over the cell.
struct EntryAlpha {
  std::optional<Vec> entry_state;

  static EntryAlpha at(Vec x0) { return {std::move(x0)}; }
  static EntryAlpha worst_case() { return {}; }
};

/// T0 <= (β - α) / c1 with β = max_j n·v_j, c1 = min_j n·(A v_j + B u_j + c),
/// α = n·x0 or min_j n·v_j. Throws UnboundedTransitError when c1 <= kTolStrict.
double t0_upper_bound(const Polytope& cell, int exit_facet, const AffineModel& model,
                      const std::vector<Vec>& witnesses, const EntryAlpha& alpha);

}  // namespace pwanav::reach
