#pragma once

#include <algorithm>
#include <memory>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "sbcg/io.hpp"
#include "sbcg/lp.hpp"
#include "sbcg/problem.hpp"
#include "sbcg/problems/least_squares.hpp"
#include "sbcg/reference.hpp"

namespace sbcg {

/// Training loss as the lower level, validation loss as the upper level,
/// over an l1 ball; the test split only feeds the task metric.
struct RegressionProblem {
  Matrix A_tr, A_val, A_test;
  Vector b_tr, b_val, b_test;
  double lambda = 10.0;

  void validate() const {
    require(lambda > 0, "l1 radius must be positive");
    require(A_tr.rows() == b_tr.size() && A_val.rows() == b_val.size() && A_test.rows() == b_test.size(),
            "regression split shapes disagree");
    require(A_tr.cols() == A_val.cols() && A_tr.cols() == A_test.cols(), "feature counts differ between splits");
    require(A_tr.rows() > 0 && A_val.rows() > 0 && A_test.rows() > 0, "every split needs rows");
  }
};

/// Row permutation plus split sizes: thirds, remainder to the test split.
struct DatasetSplit {
  std::uint64_t seed = 0;
  std::vector<Index> permutation;
  Index n_train = 0, n_val = 0, n_test = 0;
};

inline DatasetSplit split_thirds(Index rows, std::uint64_t seed) {
  require(rows >= 3, "need at least three rows to split into thirds");
  DatasetSplit s;
  s.seed = seed;
  s.permutation.resize(static_cast<std::size_t>(rows));
  std::iota(s.permutation.begin(), s.permutation.end(), Index{0});
  Rng rng(seed);
  std::shuffle(s.permutation.begin(), s.permutation.end(), rng);
  s.n_train = rows / 3;
  s.n_val = rows / 3;
  s.n_test = rows - s.n_train - s.n_val;
  return s;
}

/// Splits a table whose `target_column` is the response.
inline RegressionProblem regression_from_table(const Matrix& table, Index target_column,
                                               std::uint64_t seed, double lambda) {
  require(table.cols() >= 2, "need at least one feature and one target column");
  if (target_column < 0 || target_column >= table.cols()) throw InvalidArgument("target column out of range");
  const DatasetSplit sp = split_thirds(table.rows(), seed);
  const Index d = table.cols() - 1;
  auto take = [&](Index begin, Index count, Matrix& A, Vector& b) {
    A.resize(count, d);
    b.resize(count);
    for (Index k = 0; k < count; ++k) {
      const Index row = sp.permutation[static_cast<std::size_t>(begin + k)];
      Index c = 0;
      for (Index j = 0; j < table.cols(); ++j) {
        if (j == target_column) {
          b(k) = table(row, j);
        } else {
          A(k, c++) = table(row, j);
        }
      }
    }
  };
  RegressionProblem rp;
  rp.lambda = lambda;
  take(0, sp.n_train, rp.A_tr, rp.b_tr);
  take(sp.n_train, sp.n_val, rp.A_val, rp.b_val);
  take(sp.n_train + sp.n_val, sp.n_test, rp.A_test, rp.b_test);
  rp.validate();
  return rp;
}

inline RegressionProblem load_regression_csv(const std::string& path, Index target_column,
                                             std::uint64_t seed, double lambda = 10.0) {
  const NumericTable t = read_numeric_csv(path);
  if (t.data.rows() < 3) throw IngestionError("too few data rows in " + path, t.data.rows(), 0);
  for (Index i = 0; i < t.data.rows(); ++i) {
    for (Index j = 0; j < t.data.cols(); ++j) {
      if (!std::isfinite(t.data(i, j))) {
        throw IngestionError("non-finite value", static_cast<long>(i + 1 + (t.header.empty() ? 0 : 1)),
                             static_cast<long>(j + 1));
      }
    }
  }
  return regression_from_table(t.data, target_column, seed, lambda);
}

/// Gaussian design with a planted sparse coefficient vector (5 nonzeros of
/// magnitude in [0.5, 1]) and additive Gaussian noise.
inline RegressionProblem gen_synthetic_regression(Index rows_per_split, Index d, double noise_std,
                                                  std::uint64_t seed, double lambda = 10.0) {
  require(rows_per_split >= 1 && d >= 1, "sizes must be positive");
  require(noise_std >= 0, "noise level must be nonnegative");
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> mag(0.5, 1.0);
  Vector beta = Vector::Zero(d);
  std::vector<Index> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  for (Index k = 0; k < std::min<Index>(5, d); ++k) {
    beta(idx[static_cast<std::size_t>(k)]) = (gauss(rng) < 0 ? -1.0 : 1.0) * mag(rng);
  }
  auto make = [&](Matrix& A, Vector& b) {
    A.resize(rows_per_split, d);
    for (Index i = 0; i < rows_per_split; ++i)
      for (Index j = 0; j < d; ++j) A(i, j) = gauss(rng);
    b = A * beta;
    for (Index i = 0; i < rows_per_split; ++i) b(i) += noise_std * gauss(rng);
  };
  RegressionProblem rp;
  rp.lambda = lambda;
  make(rp.A_tr, rp.b_tr);
  make(rp.A_val, rp.b_val);
  make(rp.A_test, rp.b_test);
  return rp;
}

/// Table with the target in the last column.
inline Matrix regression_split_table(const Matrix& A, const Vector& b) {
  Matrix t(A.rows(), A.cols() + 1);
  t << A, b;
  return t;
}

/// min <c, s> over {||s||_1 <= lambda, A s = b} through s = s+ - s-.
/// Returns nullopt for an infeasible system.
inline std::optional<Vector> l1_affine_lmo(const Matrix& A, const Vector& b, double lambda, const Vector& c) {
  const Index d = A.cols();
  LinearProgram lp;
  lp.cost.resize(2 * d);
  lp.cost << c, -c;
  lp.rows.resize(A.rows() + 1, 2 * d);
  lp.rows.row(0).setOnes();
  lp.rows.bottomRows(A.rows()) << A, -A;
  lp.rhs.resize(A.rows() + 1);
  lp.rhs << lambda, b;
  lp.sense.assign(static_cast<std::size_t>(A.rows() + 1), RowSense::kEqual);
  lp.sense[0] = RowSense::kLessEqual;
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible) return std::nullopt;
  if (sol.status != LpStatus::kOptimal) throw Error("solution-set LP did not reach an optimum");
  return Vector(sol.x.head(d) - sol.x.tail(d));
}

inline double regression_test_error(const RegressionProblem& rp, const Vector& beta) {
  return (rp.A_test * beta - rp.b_test).squaredNorm() / (2.0 * static_cast<double>(rp.A_test.rows()));
}

/// The bilevel instance. The solution-set oracle is attached only when the
/// training system is interpolable inside the ball (then X_g* = {A_tr s = b_tr}
/// intersected with the ball).
inline BilevelProblem regression_oracles(const RegressionProblem& rp) {
  rp.validate();
  auto upper = std::make_shared<LeastSquaresOracle>(rp.A_val, rp.b_val);
  auto lower = std::make_shared<LeastSquaresOracle>(rp.A_tr, rp.b_tr);
  const Index d = rp.A_tr.cols();
  BilevelProblem p{"regression", upper, lower, FeasibleSet(L1Ball{rp.lambda, d}), {}, {}, {}, "test_error"};

  auto lipschitz_value = [&](const Matrix& A, const Vector& b) {
    double best = 0.0;
    for (Index i = 0; i < A.rows(); ++i) {
      best = std::max(best, A.row(i).norm() * (rp.lambda * A.row(i).cwiseAbs().maxCoeff() + std::abs(b(i))));
    }
    return best;
  };
  ProblemConstants& k = p.constants;
  k.L_f = upper->max_row_norm_sq();
  k.L_g = lower->max_row_norm_sq();
  k.L_l = lipschitz_value(rp.A_tr, rp.b_tr);
  // Sample gradients and values are bounded on Z, so their deviations are too.
  k.sigma_f = 2.0 * lipschitz_value(rp.A_val, rp.b_val);
  k.sigma_g = 2.0 * k.L_l;
  double vmax = 0.0;
  for (Index i = 0; i < rp.A_tr.rows(); ++i) {
    const double r = rp.lambda * rp.A_tr.row(i).cwiseAbs().maxCoeff() + std::abs(rp.b_tr(i));
    vmax = std::max(vmax, 0.5 * r * r);
  }
  k.sigma_l = vmax;
  k.D = 2.0 * rp.lambda;

  if (l1_affine_lmo(rp.A_tr, rp.b_tr, rp.lambda, Vector::Zero(d))) {
    const Matrix A = rp.A_tr;
    const Vector b = rp.b_tr;
    const double lam = rp.lambda;
    p.solution_set_lmo = [A, b, lam](const Vector& c) {
      auto s = l1_affine_lmo(A, b, lam, c);
      if (!s) throw Error("solution-set LP became infeasible");
      return *s;
    };
  }
  const RegressionProblem copy = rp;
  p.task_metric = [copy](const Vector& beta) { return regression_test_error(copy, beta); };
  return p;
}

namespace detail {

// Equality-constrained least squares on a fixed support with fixed signs:
// min 0.5/n ||A_v z - b_v||^2 s.t. A_tr z = b_tr (and sign' z = lambda when
// the ball constraint is active), via the KKT system.
inline std::optional<Vector> polish_on_support(const RegressionProblem& rp, const Vector& beta) {
  const Index d = beta.size();
  const double scale = beta.cwiseAbs().maxCoeff();
  std::vector<Index> support;
  for (Index i = 0; i < d; ++i) {
    if (std::abs(beta(i)) > 1e-9 * std::max(scale, 1.0)) support.push_back(i);
  }
  const Index k = static_cast<Index>(support.size());
  if (k == 0) return std::nullopt;
  const bool ball_active = std::abs(beta.lpNorm<1>() - rp.lambda) <= 1e-6 * rp.lambda;
  const Index m = rp.A_tr.rows() + (ball_active ? 1 : 0);
  Matrix Av(rp.A_val.rows(), k), E(m, k);
  Vector rhs(m);
  for (Index j = 0; j < k; ++j) {
    const Index i = support[static_cast<std::size_t>(j)];
    Av.col(j) = rp.A_val.col(i);
    E.col(j).head(rp.A_tr.rows()) = rp.A_tr.col(i);
    if (ball_active) E(m - 1, j) = beta(i) > 0 ? 1.0 : -1.0;
  }
  rhs.head(rp.A_tr.rows()) = rp.b_tr;
  if (ball_active) rhs(m - 1) = rp.lambda;
  const double n = static_cast<double>(rp.A_val.rows());
  Matrix K = Matrix::Zero(k + m, k + m);
  K.topLeftCorner(k, k) = Av.transpose() * Av / n;
  K.topRightCorner(k, m) = E.transpose();
  K.bottomLeftCorner(m, k) = E;
  Vector r(k + m);
  r.head(k) = Av.transpose() * rp.b_val / n;
  r.tail(m) = rhs;
  const Vector sol = K.completeOrthogonalDecomposition().solve(r);
  Vector out = Vector::Zero(d);
  for (Index j = 0; j < k; ++j) {
    const Index i = support[static_cast<std::size_t>(j)];
    if ((sol(j) > 0) != (beta(i) > 0) && std::abs(sol(j)) > 1e-12) return std::nullopt;
    out(i) = sol(j);
  }
  if (out.lpNorm<1>() > rp.lambda * (1 + 1e-12)) return std::nullopt;
  return out;
}

}  // namespace detail

/// g* and f* for a regression instance. In the interpolating regime g* = 0
/// and f* comes from an augmented Lagrangian solve over the ball, polished on
/// its support and certified by the solution-set duality gap. Otherwise g* is
/// an accelerated projected-gradient optimum and f* uses the generic path.
inline ReferenceValues regression_reference(const RegressionProblem& rp, const BilevelProblem& p,
                                            const ReferenceConfig& cfg = {}) {
  const Index d = rp.A_tr.cols();
  if (!p.solution_set_lmo) return reference_values(p, Vector::Zero(d), cfg);

  ReferenceValues refs;
  refs.g_star = 0.0;
  refs.tolerance = cfg.g_gap_tol;
  const FeasibleSet ball(L1Ball{rp.lambda, d});
  const double n_tr = static_cast<double>(rp.A_tr.rows());
  double rho = 10.0;
  double last_residual = std::numeric_limits<double>::infinity();
  Vector mu = Vector::Zero(rp.A_tr.rows());
  Vector beta = *l1_affine_lmo(rp.A_tr, rp.b_tr, rp.lambda, Vector::Zero(d));
  for (int outer = 0; outer < 100; ++outer) {
    const auto F = [&](const Vector& x) {
      const Vector r = rp.A_tr * x - rp.b_tr;
      return p.upper->full_value(x) + mu.dot(r) / n_tr + 0.5 * rho * r.squaredNorm() / n_tr;
    };
    const auto G = [&](const Vector& x) {
      const Vector r = rp.A_tr * x - rp.b_tr;
      return Vector(p.upper->full_grad(x) + rp.A_tr.transpose() * (mu + rho * r) / n_tr);
    };
    beta = minimize_apg(F, G, ball, beta, 1e-12, 20000).x;
    const Vector r = rp.A_tr * beta - rp.b_tr;
    mu += rho * r;
    const double residual = r.cwiseAbs().maxCoeff();
    if (residual <= 1e-11) break;
    if (residual > 0.25 * last_residual && rho < 1e8) rho *= 10.0;  // slow progress: stiffen the penalty
    last_residual = residual;
  }
  auto certify = [&](const Vector& x) {
    const Vector gf = p.upper->full_grad(x);
    return gf.dot(x - p.solution_set_lmo(gf));
  };
  Vector best = beta;
  if (auto pol = detail::polish_on_support(rp, beta)) {
    if ((rp.A_tr * *pol - rp.b_tr).cwiseAbs().maxCoeff() <= 1e-9 && std::abs(certify(*pol)) <= std::abs(certify(beta))) {
      best = *pol;
    }
  }
  const double gap = certify(best);
  const double residual = (rp.A_tr * best - rp.b_tr).cwiseAbs().maxCoeff();
  if (std::abs(gap) > cfg.f_gap_tol || residual > 1e-8) {
    throw ReferenceFailure("regression f* did not certify", std::max(std::abs(gap), residual));
  }
  refs.f_star = p.upper->full_value(best);
  refs.f_tolerance = std::max(std::abs(gap), 1e-15);
  return refs;
}

}  // namespace sbcg
