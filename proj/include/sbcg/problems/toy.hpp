#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "sbcg/problem.hpp"
#include "sbcg/problems/least_squares.hpp"

namespace sbcg {

/// Deterministic linear objective <c, x> as a one-component finite sum.
class LinearOracle final : public StochasticOracle {
 public:
  explicit LinearOracle(Vector c) : c_(std::move(c)) {
    if (c_.size() == 0) throw InvalidArgument("linear objective needs a dimension");
  }
  Index dimension() const override { return c_.size(); }
  OracleKind kind() const override { return OracleKind::kFiniteSum; }
  Index num_components() const override { return 1; }
  double value(const Vector& x, Sample) const override { return c_.dot(x); }
  void accumulate_grad(const Vector&, Sample, double weight, Vector& out) const override {
    out.noalias() += weight * c_;
  }

 private:
  Vector c_;
};

/// Streaming quadratic 0.5 (x - c)' diag(h) (x - c) with additive Gaussian
/// noise on gradients and values. The per-coordinate noise std is scaled so
/// that E exp(||noise||^2 / sigma^2) = e, i.e. sigma is exactly the
/// sub-Gaussian scale of the noise norm.
class NoisyQuadraticOracle final : public StochasticOracle {
 public:
  NoisyQuadraticOracle(Vector h, Vector center, double sigma_grad, double sigma_value)
      : h_(std::move(h)), c_(std::move(center)) {
    require_same_size(h_, c_, "quadratic curvature vs center");
    require((h_.array() >= 0).all(), "curvatures must be nonnegative");
    require(sigma_grad >= 0 && sigma_value >= 0, "noise scales must be nonnegative");
    const double d = static_cast<double>(h_.size());
    grad_std_ = sigma_grad * std::sqrt((1.0 - std::exp(-2.0 / d)) / 2.0);
    value_std_ = sigma_value * std::sqrt((1.0 - std::exp(-2.0)) / 2.0);
  }

  Index dimension() const override { return h_.size(); }
  OracleKind kind() const override { return OracleKind::kStreaming; }

  double value(const Vector& x, Sample s) const override {
    Rng r(s);
    std::normal_distribution<double> n(0.0, 1.0);
    for (Index i = 0; i < h_.size(); ++i) n(r);  // gradient noise comes first in the stream
    return exact_value(x) + value_std_ * n(r);
  }
  void accumulate_grad(const Vector& x, Sample s, double weight, Vector& out) const override {
    Rng r(s);
    std::normal_distribution<double> n(0.0, 1.0);
    for (Index i = 0; i < h_.size(); ++i) out(i) += weight * (h_(i) * (x(i) - c_(i)) + grad_std_ * n(r));
  }

  double full_value(const Vector& x) const override { return exact_value(x); }
  Vector full_grad(const Vector& x) const override { return h_.cwiseProduct(x - c_); }

  const Vector& center() const { return c_; }

 protected:
  bool has_expectation() const override { return true; }

 private:
  double exact_value(const Vector& x) const { return 0.5 * (x - c_).cwiseProduct(h_).dot(x - c_); }

  Vector h_, c_;
  double grad_std_ = 0.0, value_std_ = 0.0;
};

/// min beta_2 over argmin_{||beta||_1 <= 2} 0.5 (beta_1 - 1)^2.
/// X_g* = {beta_1 = 1, |beta_2| <= 1}, so g* = 0 and f* = -1.
inline BilevelProblem toy_bilevel_problem() {
  Matrix A(1, 2);
  A << 1.0, 0.0;
  Vector b(1);
  b << 1.0;
  Vector c(2);
  c << 0.0, 1.0;
  BilevelProblem p{"toy", std::make_shared<LinearOracle>(c), std::make_shared<LeastSquaresOracle>(A, b),
                   FeasibleSet(L1Ball{2.0, 2}), {}, {}, {}};
  p.constants = ProblemConstants{1.0, 1.0, 3.0, 0.0, 0.0, 0.0, 4.0};
  p.solution_set_lmo = [](const Vector& dir) {
    Vector s(2);
    s << 1.0, dir(1) > 0 ? -1.0 : (dir(1) < 0 ? 1.0 : 0.0);
    return s;
  };
  return p;
}

/// Noisy strongly convex lower level on the l1 ball with its minimizer
/// `center` inside, and a linear upper level. X_g* = {center}.
inline BilevelProblem noisy_quadratic_problem(const Vector& curvature, const Vector& center, double radius,
                                              double sigma_g, double sigma_l, const Vector& upper_dir) {
  require(center.lpNorm<1>() <= radius, "minimizer must lie in the ball");
  auto lower = std::make_shared<NoisyQuadraticOracle>(curvature, center, sigma_g, sigma_l);
  BilevelProblem p{"noisy-quadratic", std::make_shared<LinearOracle>(upper_dir), lower,
                   FeasibleSet(L1Ball{radius, center.size()}), {}, {}, {}};
  const double D = 2.0 * radius;
  const double hmax = curvature.maxCoeff();
  // |g(x) - g(y)| <= max ||grad g|| ||x - y|| on Z.
  // L_f only has to be positive for a linear upper level.
  p.constants = ProblemConstants{1e-12, std::max(hmax, 1e-12), std::max(hmax * D, 1e-12), 0.0,
                                 sigma_g, sigma_l, D};
  const Vector c = center;
  p.solution_set_lmo = [c](const Vector&) { return c; };
  return p;
}

}  // namespace sbcg
