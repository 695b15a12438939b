#include "pwanav/sysid.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace pwanav::sysid {

namespace {

constexpr double kMaxCondition = 1e12;

double condition_number(const Mat& gram) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

// Uniform in [0, 1) from the top 53 bits; stable across standard libraries.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

double default_input_scale(const Box& control_box) {
  return 0.1 * (0.5 * (control_box.hi - control_box.lo)).minCoeff();
}

IdentificationResult identify(const dynamics::ControlAffineField& env, const Vec& x_init,
                              const IdentificationConfig& cfg, const Box& control_box) {
  const int n = env.state_dim();
  const int m = env.input_dim();
  const int p = n + m + 1;
  if (cfg.samples < p) {
    throw IdentificationFailedError("need at least " + std::to_string(p) +
                                    " samples for an identifiable regression, got " +
                                    std::to_string(cfg.samples));
  }
  if (!(cfg.time_step > 0.0) || !(cfg.input_scale > 0.0)) {
    throw PreconditionError("identification time step and input scale must be positive");
  }

  std::mt19937_64 rng(cfg.seed);
  Mat X(p, cfg.samples);
  Mat Xdot(n, cfg.samples);
  IdentificationResult out;
  out.samples.reserve(cfg.samples);

  Vec x = x_init;
  for (int i = 0; i < cfg.samples; ++i) {
    Vec u(m);
    for (int k = 0; k < m; ++k) u[k] = cfg.input_scale * (2.0 * uniform01(rng) - 1.0);
    u = control_box.clamp(u);

    const dynamics::FeedbackLaw hold = [&u](const Vec&) { return u; };
    const Vec x_new = dynamics::rk4_step(env, hold, x, cfg.time_step);
    const Vec xdot = cfg.velocity_mode == VelocityMode::OracleVelocity
                         ? env.velocity(x, u)
                         : Vec((x_new - x) / cfg.time_step);

    X.col(i) << x, u, 1.0;
    Xdot.col(i) = xdot;
    out.max_speed = std::max(out.max_speed, xdot.norm());
    out.samples.push_back({i * cfg.time_step, x, u});
    x = x_new;
  }

  if (!X.allFinite() || !Xdot.allFinite()) {
    throw IdentificationFailedError("non-finite state or velocity during excitation");
  }
  Mat gram = X * X.transpose();
  Mat theta;
  if (condition_number(gram) <= kMaxCondition) {
    // Θ = Ẋ Xᵀ (X Xᵀ)⁻¹, computed from a QR factorization of Xᵀ so the
    // conditioning of the Gram matrix is not squared a second time.
    theta = X.transpose().colPivHouseholderQr().solve(Xdot.transpose()).transpose();
  } else {
    gram.diagonal().array() += 1e-8 * gram.trace() / p;
    out.ridge_used = true;
    if (condition_number(gram) > kMaxCondition) {
      throw IdentificationFailedError("regressor Gram matrix is ill-conditioned");
    }
    theta = gram.ldlt().solve(X * Xdot.transpose()).transpose();
  }

  out.model.A = theta.leftCols(n);
  out.model.B = theta.middleCols(n, m);
  out.model.c = theta.col(n + m);
  out.model.center = X.topRows(n).rowwise().mean();
  out.final_state = x;
  out.residual_rms = std::sqrt((Xdot - theta * X).squaredNorm() / (n * cfg.samples));
  return out;
}

}  // namespace pwanav::sysid
