#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "pwanav/common.hpp"
#include "pwanav/geometry.hpp"

namespace pwanav::dynamics {

/// ẋ = f(x) + g(x)u with declared Lipschitz constants for ∇f and g.
/// Implementations must be pure: evaluators may not carry hidden state.
class ControlAffineField {
 public:
  ControlAffineField(int state_dim, int input_dim, double lipschitz_df, double lipschitz_g);
  virtual ~ControlAffineField() = default;

  int state_dim() const { return state_dim_; }
  int input_dim() const { return input_dim_; }
  double lipschitz_df() const { return lipschitz_df_; }
  double lipschitz_g() const { return lipschitz_g_; }

  virtual Vec drift(const Vec& x) const = 0;
  virtual Mat control_matrix(const Vec& x) const = 0;
  /// Analytic ∇f, when the field has one.
  virtual std::optional<Mat> drift_jacobian(const Vec& /*x*/) const { return std::nullopt; }

  Vec velocity(const Vec& x, const Vec& u) const { return drift(x) + control_matrix(x) * u; }

 private:
  int state_dim_;
  int input_dim_;
  double lipschitz_df_;
  double lipschitz_g_;
};

/// Ground mobile robot on uneven terrain:
///   f(x) = [-0.5 sin(0.1x1 - 0.2x2) - 4.5, -0.2 sin(0.3x1 - 0.1x2) - 4.5]
///   g(x) = [[1 + 0.02x1, 0.02x2], [-0.02x1, 1 - 0.02x2]]
/// with L_df = L_g = 0.03.
class TerrainField final : public ControlAffineField {
 public:
  TerrainField();
  Vec drift(const Vec& x) const override;
  Mat control_matrix(const Vec& x) const override;
  std::optional<Mat> drift_jacobian(const Vec& x) const override;
};

/// f(x) = A x + c, g(x) = B.
class AffineField final : public ControlAffineField {
 public:
  AffineField(Mat A, Mat B, Vec c, double lipschitz_df, double lipschitz_g);
  Vec drift(const Vec& x) const override { return A_ * x + c_; }
  Mat control_matrix(const Vec& /*x*/) const override { return B_; }
  std::optional<Mat> drift_jacobian(const Vec& /*x*/) const override { return A_; }

 private:
  Mat A_;
  Mat B_;
  Vec c_;
};

/// Field given by callables; no analytic Jacobian.
class FunctionField final : public ControlAffineField {
 public:
  FunctionField(int state_dim, int input_dim, std::function<Vec(const Vec&)> drift,
                std::function<Mat(const Vec&)> control_matrix, double lipschitz_df,
                double lipschitz_g);
  Vec drift(const Vec& x) const override { return drift_(x); }
  Mat control_matrix(const Vec& x) const override { return control_(x); }

 private:
  std::function<Vec(const Vec&)> drift_;
  std::function<Mat(const Vec&)> control_;
};

std::shared_ptr<const ControlAffineField> terrain_model();

/// Affine vector field A x + B u + c on one cell, with its linearization center.
struct AffineModel {
  Mat A;
  Mat B;
  Vec c;
  Vec center;

  Vec velocity(const Vec& x, const Vec& u) const { return A * x + B * u + c; }
};

/// A = ∇f(x_e), B = g(x_e), c = f(x_e) - A x_e. Uses the analytic Jacobian when
/// available, central differences otherwise.
AffineModel linearize_at(const ControlAffineField& field, const Vec& x_e);

/// Same as linearize_at but always differentiates numerically (step 1e-5).
AffineModel linearize_numeric(const ControlAffineField& field, const Vec& x_e);

using FeedbackLaw = std::function<Vec(const Vec&)>;

/// One classical RK4 step of length h for ẋ = f(x) + g(x)·input(x).
Vec rk4_step(const ControlAffineField& field, const FeedbackLaw& input, const Vec& x, double h);

enum class ExitOutcome { ExitedFacet, Timeout, LeftDomain };

struct ExitRecord {
  Vec exit_state;
  /// Time spent in the cell, measured from the start of the simulation.
  double exit_time = 0.0;
  std::optional<int> exit_facet;
  ExitOutcome outcome = ExitOutcome::Timeout;
};

struct TrajectorySample {
  double t = 0.0;
  Vec x;
  Vec u;
};

struct SimulationOptions {
  /// When set, an exit state outside this box is reported as LeftDomain.
  std::optional<Box> domain;
  /// Receives one sample per integration step plus the exit sample, with
  /// times offset by `time_offset`.
  std::vector<TrajectorySample>* recorder = nullptr;
  double time_offset = 0.0;
};

/// Integrates the closed loop with fixed-step RK4, saturating the input to the
/// control box. After each step the state is tested against the cell; on
/// leaving it, the crossing time is bisected to 1e-10 and the crossed facet
/// is the one with the largest signed violation.
ExitRecord simulate_closed_loop(const ControlAffineField& field, const FeedbackLaw& law,
                                const geometry::Polytope& cell, const Vec& x0, double step,
                                double t_max, const Box& control_box,
                                const SimulationOptions& options = {});

}  // namespace pwanav::dynamics
