#pragma once

#include <random>

#include "pwanav/common.hpp"
#include "pwanav/dynamics.hpp"
#include "pwanav/geometry.hpp"

namespace testing_support {

using pwanav::Box;
using pwanav::Mat;
using pwanav::Vec;

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline Box box(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  return {vec(lo), vec(hi)};
}

inline Box unit_box(int n) { return {Vec::Zero(n), Vec::Ones(n)}; }

inline pwanav::geometry::Polytope unit_square() { return pwanav::geometry::make_box(unit_box(2)); }

struct Rng {
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  Vec vector(int n, double lo, double hi) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  Mat matrix(int r, int c, double lo, double hi) {
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  std::mt19937_64 gen;
};

// Facet index of the unit square (or any box) by axis and side.
inline int lower_facet(int d) { return 2 * d; }
inline int upper_facet(int d) { return 2 * d + 1; }

inline pwanav::dynamics::AffineModel affine(const Mat& A, const Mat& B, const Vec& c) {
  return {A, B, c, Vec::Zero(A.rows())};
}

inline pwanav::dynamics::AffineModel single_integrator(int n) {
  return affine(Mat::Zero(n, n), Mat::Identity(n, n), Vec::Zero(n));
}

}  // namespace testing_support
