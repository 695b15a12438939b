#include "pwanav/lincon.hpp"

#include <cmath>
#include <limits>

namespace pwanav::lincon {

namespace {

constexpr double kPivotEps = 1e-11;

// Dense two-phase tableau simplex with Bland's rule (lowest-index entering
// column, lowest-index basic variable on ratio ties). Deterministic and
// cycle-free; intended for a handful of variables and a few dozen rows.
class Tableau {
 public:
  Tableau(const Mat& G, const Vec& h) : rows_(static_cast<int>(G.rows())) {
    structural_ = static_cast<int>(G.cols());
    for (int i = 0; i < rows_; ++i) {
      if (h[i] < 0.0) ++artificials_;
    }
    cols_ = structural_ + rows_ + artificials_;
    t_ = Mat::Zero(rows_ + 1, cols_ + 1);
    basis_.resize(rows_);
    active_.assign(rows_, true);

    int art = 0;
    for (int i = 0; i < rows_; ++i) {
      const double sign = h[i] < 0.0 ? -1.0 : 1.0;
      t_.row(i).head(structural_) = sign * G.row(i);
      t_(i, structural_ + i) = sign;
      t_(i, cols_) = sign * h[i];
      if (h[i] < 0.0) {
        const int col = structural_ + rows_ + art++;
        t_(i, col) = 1.0;
        basis_[i] = col;
        art_scale_ += std::abs(h[i]);
      } else {
        basis_[i] = structural_ + i;
      }
    }
  }

  bool phase_one() {
    if (artificials_ == 0) return true;
    t_.row(rows_).setZero();
    for (int j = first_artificial(); j < cols_; ++j) t_(rows_, j) = 1.0;
    for (int i = 0; i < rows_; ++i) {
      if (is_artificial(basis_[i])) t_.row(rows_) -= t_.row(i);
    }
    iterate(/*allow_artificial=*/true);
    if (t_(rows_, cols_) < -1e-10 * (1.0 + art_scale_)) return false;

    for (int i = 0; i < rows_; ++i) {
      if (!is_artificial(basis_[i])) continue;
      int col = -1;
      for (int j = 0; j < first_artificial(); ++j) {
        if (std::abs(t_(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        active_[i] = false;  // redundant row
      }
    }
    return true;
  }

  void phase_two(const Vec& c) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(structural_) = -c.transpose();
    for (int i = 0; i < rows_; ++i) {
      if (!active_[i] || basis_[i] >= structural_) continue;
      t_.row(rows_) += c[basis_[i]] * t_.row(i);
    }
    iterate(/*allow_artificial=*/false);
  }

  Vec solution() const {
    Vec z = Vec::Zero(structural_);
    for (int i = 0; i < rows_; ++i) {
      if (active_[i] && basis_[i] < structural_) z[basis_[i]] = std::max(0.0, t_(i, cols_));
    }
    return z;
  }

 private:
  int first_artificial() const { return structural_ + rows_; }
  bool is_artificial(int col) const { return col >= first_artificial(); }

  void pivot(int r, int col) {
    t_.row(r) /= t_(r, col);
    for (int k = 0; k <= rows_; ++k) {
      if (k == r) continue;
      const double f = t_(k, col);
      if (f != 0.0) t_.row(k) -= f * t_.row(r);
    }
    basis_[r] = col;
  }

  void iterate(bool allow_artificial) {
    const int limit = allow_artificial ? cols_ : first_artificial();
    for (;;) {
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (t_(rows_, j) < -kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;

      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows_; ++i) {
        if (!active_[i] || t_(i, enter) <= kPivotEps) continue;
        const double ratio = t_(i, cols_) / t_(i, enter);
        const double tie = 1e-12 * (1.0 + std::abs(ratio));
        if (leave < 0 || ratio < best - tie) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + tie && basis_[i] < basis_[leave]) {
          leave = i;
        }
      }
      if (leave < 0) throw PreconditionError("linear program is unbounded");
      pivot(leave, enter);
    }
  }

  int rows_ = 0;
  int structural_ = 0;
  int artificials_ = 0;
  int cols_ = 0;
  double art_scale_ = 0.0;
  Mat t_;
  std::vector<int> basis_;
  std::vector<bool> active_;
};

bool has_relation(const LinearConstraintSystem& sys, Relation rel) {
  for (const auto& r : sys.rows) {
    if (r.relation == rel) return true;
  }
  return false;
}

// Builds the shifted program in y = u - lo (y >= 0) plus one trailing
// auxiliary variable t that enters the rows selected by `t_on_strict`.
//   strict rows:     -a·y + [t] <= a·lo - rhs - strict_floor
//   non-strict rows:  a·y + [t] <= rhs - a·lo
//   y <= hi - lo, t <= kMarginCap
struct Program {
  Mat G;
  Vec h;
  Vec c;
};

Program build_program(const LinearConstraintSystem& sys, bool t_on_strict, double strict_floor) {
  const int m = sys.dim;
  const int nrows = static_cast<int>(sys.rows.size());
  Program p;
  p.G = Mat::Zero(nrows + m + 1, m + 1);
  p.h = Vec::Zero(nrows + m + 1);
  for (int i = 0; i < nrows; ++i) {
    const Row& r = sys.rows[i];
    const double at_lo = r.coeffs.dot(sys.box.lo);
    if (r.relation == Relation::StrictGreater) {
      p.G.row(i).head(m) = -r.coeffs.transpose();
      p.G(i, m) = t_on_strict ? 1.0 : 0.0;
      p.h[i] = at_lo - r.rhs - (t_on_strict ? 0.0 : strict_floor);
    } else {
      p.G.row(i).head(m) = r.coeffs.transpose();
      p.G(i, m) = t_on_strict ? 0.0 : 1.0;
      p.h[i] = r.rhs - at_lo;
    }
  }
  for (int k = 0; k < m; ++k) {
    p.G(nrows + k, k) = 1.0;
    p.h[nrows + k] = sys.box.hi[k] - sys.box.lo[k];
  }
  p.G(nrows + m, m) = 1.0;
  p.h[nrows + m] = kMarginCap;
  p.c = Vec::Zero(m + 1);
  p.c[m] = 1.0;
  return p;
}

}  // namespace

void LinearConstraintSystem::validate() const {
  if (dim <= 0) throw PreconditionError("constraint system needs a positive dimension");
  if (box.lo.size() != dim || box.hi.size() != dim) {
    throw PreconditionError("control box dimension mismatch");
  }
  for (int k = 0; k < dim; ++k) {
    if (!(box.lo[k] <= box.hi[k])) throw PreconditionError("control box is empty");
  }
  for (const auto& r : rows) {
    if (r.coeffs.size() != dim) throw PreconditionError("row coefficient length mismatch");
  }
}

std::optional<Vec> solve_lp(const Mat& G, const Vec& h, const Vec& c) {
  Tableau t(G, h);
  if (!t.phase_one()) return std::nullopt;
  t.phase_two(c);
  return t.solution();
}

double strict_slack(const LinearConstraintSystem& sys, const Vec& u) {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& r : sys.rows) {
    if (r.relation == Relation::StrictGreater) s = std::min(s, r.coeffs.dot(u) - r.rhs);
  }
  return s;
}

double nonstrict_violation(const LinearConstraintSystem& sys, const Vec& u) {
  double v = -std::numeric_limits<double>::infinity();
  for (const auto& r : sys.rows) {
    if (r.relation == Relation::NonStrictLessEq) v = std::max(v, r.coeffs.dot(u) - r.rhs);
  }
  return v;
}

FeasibilityResult decide_feasibility(const LinearConstraintSystem& sys) {
  sys.validate();
  const int m = sys.dim;
  const bool any_strict = has_relation(sys, Relation::StrictGreater);

  const Program primary = build_program(sys, /*t_on_strict=*/true, 0.0);
  const auto z = solve_lp(primary.G, primary.h, primary.c);
  if (!z) return {};

  const double delta = (*z)[m];
  Vec witness = sys.box.lo + z->head(m);
  witness = sys.box.clamp(witness);
  if (any_strict && !(delta > kTolStrict && strict_slack(sys, witness) > kTolStrict)) return {};

  if (has_relation(sys, Relation::NonStrictLessEq)) {
    const double floor = any_strict ? delta - 1e-9 * std::max(1.0, delta) : 0.0;
    const Program centered = build_program(sys, /*t_on_strict=*/false, floor);
    if (const auto z2 = solve_lp(centered.G, centered.h, centered.c)) {
      const Vec candidate = sys.box.clamp(sys.box.lo + z2->head(m));
      const bool strict_ok = !any_strict || strict_slack(sys, candidate) > kTolStrict;
      if (strict_ok && nonstrict_violation(sys, candidate) <= 1e-9) witness = candidate;
    }
  }

  FeasibilityResult out;
  out.feasible = true;
  out.margin = any_strict ? strict_slack(sys, witness) : kMarginCap;
  out.witness = std::move(witness);
  return out;
}

}  // namespace pwanav::lincon
