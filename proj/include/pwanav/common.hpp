#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pwanav {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Absolute tolerance for facet membership and point-in-set tests.
inline constexpr double kGeomTol = 1e-9;

/// Axis-aligned box [lo, hi] used for the state domain P_s and the control set P_u.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x, double tol = kGeomTol) const;
  Vec clamp(const Vec& x) const;
  Vec center() const { return 0.5 * (lo + hi); }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PWANAV_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

PWANAV_DEFINE_ERROR(InvalidDomainError);
PWANAV_DEFINE_ERROR(OutOfDomainError);
PWANAV_DEFINE_ERROR(UnsupportedGeometryError);
PWANAV_DEFINE_ERROR(PreconditionError);
PWANAV_DEFINE_ERROR(IdentificationFailedError);
PWANAV_DEFINE_ERROR(SynthesisError);
PWANAV_DEFINE_ERROR(UnboundedTransitError);
PWANAV_DEFINE_ERROR(ConfigError);

#undef PWANAV_DEFINE_ERROR

inline bool Box::contains(const Vec& x, double tol) const {
  if (x.size() != lo.size()) return false;
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    if (x[d] < lo[d] - tol || x[d] > hi[d] + tol) return false;
  }
  return true;
}

inline Vec Box::clamp(const Vec& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

}  // namespace pwanav
