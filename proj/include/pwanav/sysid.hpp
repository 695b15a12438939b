#pragma once

#include <cstdint>
#include <vector>

#include "pwanav/common.hpp"
#include "pwanav/dynamics.hpp"

namespace pwanav::sysid {

enum class VelocityMode {
  /// ẋ read exactly as f(x) + g(x)u.
  OracleVelocity,
  /// ẋ estimated as (x_new - x) / T from one RK4 step of length T.
  FiniteDifference,
};

struct IdentificationConfig {
  int samples = 100;
  double time_step = 1e-3;
  double input_scale = 0.5;
  VelocityMode velocity_mode = VelocityMode::OracleVelocity;
  std::uint64_t seed = 0;
};

/// 0.1 × the smallest half-width of the control box.
double default_input_scale(const Box& control_box);

struct IdentificationResult {
  dynamics::AffineModel model;
  Vec final_state;
  double residual_rms = 0.0;
  /// Largest ‖ẋ‖ among the recorded velocities.
  double max_speed = 0.0;
  bool ridge_used = false;
  /// Excitation samples (t relative to the start of the run).
  std::vector<dynamics::TrajectorySample> samples;
};

/// Excites the environment with N small random inputs (uniform in
/// [-input_scale, input_scale]^m, clamped into the control box), stepping the
/// state forward without resets, and fits Θ = [A | B | c] by least squares on
/// the regressors [xᵀ, uᵀ, 1]ᵀ. The model center is the mean visited state.
///
/// Throws IdentificationFailedError when N < n + m + 1 or when the regressor
/// Gram matrix stays ill-conditioned (condition number > 1e12) after one
/// ridge retry.
IdentificationResult identify(const dynamics::ControlAffineField& env, const Vec& x_init,
                              const IdentificationConfig& cfg, const Box& control_box);

}  // namespace pwanav::sysid
