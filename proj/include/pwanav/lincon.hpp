#pragma once

#include <optional>
#include <vector>

#include "pwanav/common.hpp"

namespace pwanav::lincon {

/// Slack a strict row must certify before it counts as satisfied.
inline constexpr double kTolStrict = 1e-7;
/// Upper bound on the auxiliary margin variable.
inline constexpr double kMarginCap = 1e6;

enum class Relation { StrictGreater, NonStrictLessEq };

/// coeffs·u > rhs (StrictGreater) or coeffs·u <= rhs (NonStrictLessEq).
struct Row {
  Vec coeffs;
  double rhs = 0.0;
  Relation relation = Relation::NonStrictLessEq;
};

struct LinearConstraintSystem {
  int dim = 0;
  std::vector<Row> rows;
  Box box;

  void add_greater(Vec coeffs, double rhs) {
    rows.push_back({std::move(coeffs), rhs, Relation::StrictGreater});
  }
  void add_less_eq(Vec coeffs, double rhs) {
    rows.push_back({std::move(coeffs), rhs, Relation::NonStrictLessEq});
  }
  /// Throws PreconditionError on inconsistent dimensions or an empty box.
  void validate() const;
};

struct FeasibilityResult {
  bool feasible = false;
  std::optional<Vec> witness;
  /// Smallest strict-row slack achieved by the witness; kMarginCap when the
  /// system has no strict rows.
  double margin = 0.0;
};

/// Decides the mixed strict/non-strict system by maximizing a common slack δ
/// on the strict rows over the box (0 <= δ <= kMarginCap), and declares it
/// feasible iff δ* > kTolStrict.
///
/// Among δ-maximizing inputs, the returned witness additionally maximizes the
/// common slack of the non-strict rows, which keeps it off non-strict
/// boundaries whenever the optimum allows.
FeasibilityResult decide_feasibility(const LinearConstraintSystem& sys);

/// Strict-row slack min over strict rows of (coeffs·u - rhs), +inf if none.
double strict_slack(const LinearConstraintSystem& sys, const Vec& u);
/// Largest non-strict violation max over non-strict rows of (coeffs·u - rhs), -inf if none.
double nonstrict_violation(const LinearConstraintSystem& sys, const Vec& u);

/// Solution of max cᵀz s.t. G z <= h, z >= 0. Exposed for testing the simplex
/// core; returns nullopt when infeasible. Unbounded programs are rejected with
/// PreconditionError (all callers bound every variable).
std::optional<Vec> solve_lp(const Mat& G, const Vec& h, const Vec& c);

}  // namespace pwanav::lincon
