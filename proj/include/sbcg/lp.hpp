#pragma once

#include <limits>
#include <vector>

#include "sbcg/types.hpp"

namespace sbcg {

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

/// min c^T x  s.t.  rows (sense) rhs,  x >= 0.
struct LinearProgram {
  Vector cost;
  Matrix rows;  // one constraint per row, cols == cost.size()
  Vector rhs;
  std::vector<RowSense> sense;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpSolution {
  LpStatus status = LpStatus::kIterationLimit;
  Vector x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int pivots = 0;
};

/// Dense two-phase simplex tableau. Dantzig pricing, switching to Bland's
/// rule after a run of degenerate pivots so cycling cannot occur.
///
/// Built for the handful-of-rows subproblems that come up here (an l1 ball plus
/// a cut, or an affine solution set); no attempt is made at sparsity or
/// numerical refactorization.
class LpTableau {
 public:
  static constexpr double kPivotTol = 1e-11;
  static constexpr int kDegenerateRun = 50;

  explicit LpTableau(const LinearProgram& lp, int max_pivots = 100000)
      : num_orig_(lp.cost.size()), max_pivots_(max_pivots) {
    const Index m = lp.rows.rows();
    if (lp.rows.cols() != num_orig_ || lp.rhs.size() != m ||
        static_cast<Index>(lp.sense.size()) != m) {
      throw InvalidArgument("linear program has inconsistent shapes");
    }
    if (!lp.cost.allFinite() || !lp.rows.allFinite() || !lp.rhs.allFinite()) {
      throw InvalidArgument("linear program has non-finite data");
    }

    // Normalize to rhs >= 0.
    Matrix a = lp.rows;
    Vector b = lp.rhs;
    std::vector<RowSense> sense = lp.sense;
    for (Index i = 0; i < m; ++i) {
      if (b(i) < 0) {
        a.row(i) *= -1.0;
        b(i) = -b(i);
        if (sense[i] == RowSense::kLessEqual) {
          sense[i] = RowSense::kGreaterEqual;
        } else if (sense[i] == RowSense::kGreaterEqual) {
          sense[i] = RowSense::kLessEqual;
        }
      }
    }

    Index num_slack = 0;
    Index num_art = 0;
    for (RowSense s : sense) {
      if (s != RowSense::kEqual) ++num_slack;
      if (s != RowSense::kLessEqual) ++num_art;
    }
    first_art_ = num_orig_ + num_slack;
    num_cols_ = first_art_ + num_art;
    rows_ = m;
    tab_.setZero(m + 2, num_cols_ + 1);
    basis_.assign(static_cast<std::size_t>(m), -1);
    active_.assign(static_cast<std::size_t>(m), true);

    Index slack = num_orig_;
    Index art = first_art_;
    for (Index i = 0; i < m; ++i) {
      tab_.row(i).head(num_orig_) = a.row(i);
      tab_(i, num_cols_) = b(i);
      switch (sense[i]) {
        case RowSense::kLessEqual:
          tab_(i, slack) = 1.0;
          basis_[i] = slack++;
          break;
        case RowSense::kGreaterEqual:
          tab_(i, slack++) = -1.0;
          tab_(i, art) = 1.0;
          basis_[i] = art++;
          break;
        case RowSense::kEqual:
          tab_(i, art) = 1.0;
          basis_[i] = art++;
          break;
      }
    }

    // Row m: phase-2 reduced costs. Row m+1: phase-1 reduced costs.
    tab_.row(m).head(num_orig_) = lp.cost.transpose();
    for (Index j = first_art_; j < num_cols_; ++j) tab_(m + 1, j) = 1.0;
    for (Index i = 0; i < m; ++i) {
      if (basis_[i] >= first_art_) tab_.row(m + 1) -= tab_.row(i);
    }
  }

  LpSolution solve() {
    LpSolution out;
    const Index m = rows_;
    if (first_art_ < num_cols_) {
      const LpStatus s1 = run(m + 1, num_cols_);
      if (s1 == LpStatus::kIterationLimit) {
        out.status = s1;
        out.pivots = pivots_;
        return out;
      }
      const double infeasibility = -tab_(m + 1, num_cols_);
      const double scale = 1.0 + tab_.col(num_cols_).head(m).cwiseAbs().maxCoeff();
      if (infeasibility > 1e-9 * scale) {
        out.status = LpStatus::kInfeasible;
        out.pivots = pivots_;
        return out;
      }
      drive_out_artificials();
    }
    out.status = run(m, first_art_);
    out.pivots = pivots_;
    if (out.status != LpStatus::kOptimal) return out;
    out.x = Vector::Zero(num_orig_);
    for (Index i = 0; i < m; ++i) {
      if (!active_[i]) continue;
      if (basis_[i] < num_orig_) out.x(basis_[i]) = tab_(i, num_cols_);
    }
    out.objective = -tab_(m, num_cols_);
    return out;
  }

 private:
  // Ratio ties are broken by lowest basic index.
  LpStatus run(Index obj_row, Index allowed_cols) {
    int degenerate = 0;
    while (true) {
      const bool bland = degenerate >= kDegenerateRun;
      Index enter = -1;
      double most = -kPivotTol;
      for (Index j = 0; j < allowed_cols; ++j) {
        if (tab_(obj_row, j) < most) {
          enter = j;
          if (bland) break;
          most = tab_(obj_row, j);
        }
      }
      if (enter < 0) return LpStatus::kOptimal;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < rows_; ++i) {
        if (!active_[i]) continue;
        const double coef = tab_(i, enter);
        if (coef <= kPivotTol) continue;
        const double ratio = tab_(i, num_cols_) / coef;
        if (ratio < best - 1e-14) {
          best = ratio;
          leave = i;
        } else if (ratio <= best + 1e-14 && basis_[i] < basis_[leave]) {
          leave = i;
        }
      }
      if (leave < 0) return LpStatus::kUnbounded;
      if (++pivots_ > max_pivots_) return LpStatus::kIterationLimit;
      degenerate = best <= 1e-14 ? degenerate + 1 : 0;
      pivot(leave, enter);
    }
  }

  void pivot(Index r, Index c) {
    tab_.row(r) /= tab_(r, c);
    const auto pr = tab_.row(r);
    for (Index i = 0; i < tab_.rows(); ++i) {
      if (i == r) continue;
      const double f = tab_(i, c);
      if (f != 0.0) tab_.row(i) -= f * pr;
    }
    // Clean the pivot column so later Bland scans see exact zeros.
    tab_.col(c).setZero();
    tab_(r, c) = 1.0;
    basis_[r] = c;
  }

  void drive_out_artificials() {
    for (Index i = 0; i < rows_; ++i) {
      if (basis_[i] < first_art_) continue;
      Index col = -1;
      for (Index j = 0; j < first_art_; ++j) {
        if (std::abs(tab_(i, j)) > kPivotTol) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        pivot(i, col);
      } else {
        active_[i] = false;  // redundant equality
      }
    }
  }

  Index num_orig_;
  Index num_cols_ = 0;
  Index first_art_ = 0;
  Index rows_ = 0;
  int max_pivots_;
  int pivots_ = 0;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tab_;
  std::vector<Index> basis_;
  std::vector<bool> active_;
};

inline LpSolution solve_lp(const LinearProgram& lp) { return LpTableau(lp).solve(); }

}  // namespace sbcg
