#include "pwanav/dynamics.hpp"

#include <cmath>

namespace pwanav::dynamics {

ControlAffineField::ControlAffineField(int state_dim, int input_dim, double lipschitz_df,
                                       double lipschitz_g)
    : state_dim_(state_dim),
      input_dim_(input_dim),
      lipschitz_df_(lipschitz_df),
      lipschitz_g_(lipschitz_g) {
  if (state_dim <= 0 || input_dim <= 0) throw PreconditionError("field dimensions must be positive");
  if (!(lipschitz_df > 0.0) || !(lipschitz_g > 0.0)) {
    throw PreconditionError("declared Lipschitz constants must be positive");
  }
}

TerrainField::TerrainField() : ControlAffineField(2, 2, 0.03, 0.03) {}

Vec TerrainField::drift(const Vec& x) const {
  Vec f(2);
  f << -0.5 * std::sin(0.1 * x[0] - 0.2 * x[1]) - 4.5,
      -0.2 * std::sin(0.3 * x[0] - 0.1 * x[1]) - 4.5;
  return f;
}

Mat TerrainField::control_matrix(const Vec& x) const {
  Mat g(2, 2);
  g << 1.0 + 0.02 * x[0], 0.02 * x[1],
      -0.02 * x[0], 1.0 - 0.02 * x[1];
  return g;
}

std::optional<Mat> TerrainField::drift_jacobian(const Vec& x) const {
  const double c1 = std::cos(0.1 * x[0] - 0.2 * x[1]);
  const double c2 = std::cos(0.3 * x[0] - 0.1 * x[1]);
  Mat j(2, 2);
  j << -0.05 * c1, 0.1 * c1,
      -0.06 * c2, 0.02 * c2;
  return j;
}

AffineField::AffineField(Mat A, Mat B, Vec c, double lipschitz_df, double lipschitz_g)
    : ControlAffineField(static_cast<int>(A.rows()), static_cast<int>(B.cols()), lipschitz_df,
                         lipschitz_g),
      A_(std::move(A)),
      B_(std::move(B)),
      c_(std::move(c)) {
  const auto n = A_.rows();
  if (A_.cols() != n || B_.rows() != n || c_.size() != n) {
    throw PreconditionError("affine field dimensions are inconsistent");
  }
}

FunctionField::FunctionField(int state_dim, int input_dim, std::function<Vec(const Vec&)> drift,
                             std::function<Mat(const Vec&)> control_matrix, double lipschitz_df,
                             double lipschitz_g)
    : ControlAffineField(state_dim, input_dim, lipschitz_df, lipschitz_g),
      drift_(std::move(drift)),
      control_(std::move(control_matrix)) {}

std::shared_ptr<const ControlAffineField> terrain_model() {
  return std::make_shared<TerrainField>();
}

namespace {

AffineModel assemble(const ControlAffineField& field, const Vec& x_e, Mat A) {
  AffineModel m;
  const Vec f = field.drift(x_e);
  m.c = f - A * x_e;
  m.A = std::move(A);
  m.B = field.control_matrix(x_e);
  m.center = x_e;
  return m;
}

Mat central_difference_jacobian(const ControlAffineField& field, const Vec& x_e) {
  constexpr double h = 1e-5;
  const int n = field.state_dim();
  Mat J(n, n);
  for (int k = 0; k < n; ++k) {
    Vec xp = x_e;
    Vec xm = x_e;
    xp[k] += h;
    xm[k] -= h;
    J.col(k) = (field.drift(xp) - field.drift(xm)) / (2.0 * h);
  }
  return J;
}

}  // namespace

AffineModel linearize_at(const ControlAffineField& field, const Vec& x_e) {
  if (auto J = field.drift_jacobian(x_e)) return assemble(field, x_e, std::move(*J));
  return linearize_numeric(field, x_e);
}

AffineModel linearize_numeric(const ControlAffineField& field, const Vec& x_e) {
  return assemble(field, x_e, central_difference_jacobian(field, x_e));
}

Vec rk4_step(const ControlAffineField& field, const FeedbackLaw& input, const Vec& x, double h) {
  auto rhs = [&](const Vec& s) { return field.velocity(s, input(s)); };
  const Vec k1 = rhs(x);
  const Vec k2 = rhs(x + 0.5 * h * k1);
  const Vec k3 = rhs(x + 0.5 * h * k2);
  const Vec k4 = rhs(x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

ExitRecord simulate_closed_loop(const ControlAffineField& field, const FeedbackLaw& law,
                                const geometry::Polytope& cell, const Vec& x0, double step,
                                double t_max, const Box& control_box,
                                const SimulationOptions& options) {
  if (!(step > 0.0) || !(t_max > 0.0)) throw PreconditionError("step and t_max must be positive");
  if (!cell.contains(x0)) throw PreconditionError("initial state lies outside the cell");

  const FeedbackLaw saturated = [&](const Vec& x) { return control_box.clamp(law(x)); };
  auto outside = [&](const Vec& x) { return cell.max_violation(x).first > kGeomTol; };
  auto record = [&](double t, const Vec& x) {
    if (options.recorder) options.recorder->push_back({options.time_offset + t, x, saturated(x)});
  };

  Vec x = x0;
  double t = 0.0;
  while (t < t_max) {
    const double h = std::min(step, t_max - t);
    record(t, x);
    const Vec next = rk4_step(field, saturated, x, h);
    if (!outside(next)) {
      x = next;
      t += h;
      continue;
    }

    double lo = 0.0;
    double hi = h;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      if (outside(rk4_step(field, saturated, x, mid))) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    ExitRecord out;
    out.exit_state = rk4_step(field, saturated, x, hi);
    out.exit_time = t + hi;
    out.exit_facet = cell.max_violation(out.exit_state).second;
    out.outcome = options.domain && !options.domain->contains(out.exit_state)
                      ? ExitOutcome::LeftDomain
                      : ExitOutcome::ExitedFacet;
    record(out.exit_time, out.exit_state);
    return out;
  }

  record(t, x);
  ExitRecord out;
  out.exit_state = x;
  out.exit_time = t;
  out.outcome = ExitOutcome::Timeout;
  return out;
}

}  // namespace pwanav::dynamics
