#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sbcg/problem.hpp"

namespace sbcg {

// Recursive-momentum correction: (1 - a) (old - at_prev) + at_x.
template <typename T>
T storm_update(const T& old, const T& at_x, const T& at_prev, double a) {
  return (1.0 - a) * (old - at_prev) + at_x;
}

// Path-integrated correction: old + at_x - at_prev.
template <typename T>
T spider_update(const T& old, const T& at_x, const T& at_prev) {
  return old + (at_x - at_prev);
}

struct MinibatchEstimate {
  double value = 0.0;
  Vector grad;
};

/// Batch mean of sampled values and gradients at x. Uses `batch` queries.
inline MinibatchEstimate minibatch_estimate(const StochasticOracle& oracle, const Vector& x,
                                            long batch, Rng& rng) {
  require(batch >= 1, "batch size must be at least 1");
  require_same_size(x, Vector::Zero(oracle.dimension()), "minibatch point");
  MinibatchEstimate out{0.0, Vector::Zero(x.size())};
  const double w = 1.0 / static_cast<double>(batch);
  for (long i = 0; i < batch; ++i) {
    out.value += w * oracle.value_and_accumulate_grad(x, oracle.draw(rng), w, out.grad);
  }
  return out;
}

namespace detail {

// Batch means at two points under one set of draws.
struct PairedBatch {
  Vector grad_x, grad_prev;
  double value_x = 0.0, value_prev = 0.0;
};

inline PairedBatch paired_batch(const StochasticOracle& o, const Vector& x, const Vector& prev,
                                long batch, Rng& rng, bool with_values) {
  PairedBatch p{Vector::Zero(x.size()), Vector::Zero(x.size())};
  const double w = 1.0 / static_cast<double>(batch);
  for (long i = 0; i < batch; ++i) {
    const Sample s = o.draw(rng);
    if (with_values) {
      p.value_x += w * o.value_and_accumulate_grad(x, s, w, p.grad_x);
      p.value_prev += w * o.value_and_accumulate_grad(prev, s, w, p.grad_prev);
    } else {
      o.accumulate_grad(x, s, w, p.grad_x);
      o.accumulate_grad(prev, s, w, p.grad_prev);
    }
  }
  return p;
}

}  // namespace detail

/// Running estimate of one level: gradient and (lower level only) value.
struct LevelEstimate {
  Vector grad;
  double value = 0.0;
};

// Each level draws from its own stream so that the upper trajectory does not
// depend on how many lower samples were consumed, and vice versa.
struct LevelStreams {
  Rng upper;
  Rng lower;
  explicit LevelStreams(Rng& parent) : upper(parent()), lower(parent()) {}
};

/// Batch mean at x; returns the number of queries used.
inline std::int64_t storm_level_init(LevelEstimate& e, const StochasticOracle& o, const Vector& x,
                                     long batch, Rng& rng) {
  const MinibatchEstimate m = minibatch_estimate(o, x, batch, rng);
  e.grad = m.grad;
  e.value = m.value;
  return batch;
}

inline std::int64_t storm_level_step(LevelEstimate& e, const StochasticOracle& o, const Vector& x,
                                     const Vector& prev, double a_grad, double a_value, long batch,
                                     Rng& rng, bool with_value) {
  const auto p = detail::paired_batch(o, x, prev, batch, rng, with_value);
  e.grad = storm_update<Vector>(e.grad, p.grad_x, p.grad_prev, a_grad);
  if (with_value) e.value = storm_update(e.value, p.value_x, p.value_prev, a_value);
  return 2 * batch;
}

inline std::int64_t spider_level_step(LevelEstimate& e, const StochasticOracle& o, const Vector& x,
                                      const Vector& prev, bool refresh, long batch, Rng& rng,
                                      bool with_value) {
  if (refresh) {
    e.grad = o.full_grad(x);
    if (with_value) e.value = o.full_value(x);
    return o.num_components();
  }
  const auto p = detail::paired_batch(o, x, prev, batch, rng, with_value);
  e.grad = spider_update<Vector>(e.grad, p.grad_x, p.grad_prev);
  if (with_value) e.value = spider_update(e.value, p.value_x, p.value_prev);
  return 2 * batch;
}

/// Estimates of the upper gradient, lower gradient and lower value.
struct StormState {
  Vector prev_point;
  LevelEstimate upper;  // upper.value is unused
  LevelEstimate lower;
  long t = 0;
  std::int64_t queries = 0;  // cumulative samples drawn, both levels

  const Vector& grad_f_est() const { return upper.grad; }
  const Vector& grad_g_est() const { return lower.grad; }
  double g_val_est() const { return lower.value; }
};

/// Fresh batch estimates at x0.
inline StormState storm_init(const Vector& x0, const BilevelProblem& problem, LevelStreams& rng,
                             long batch = 1) {
  require(batch >= 1, "batch size must be at least 1");
  StormState st;
  st.prev_point = x0;
  st.queries += storm_level_init(st.upper, *problem.upper, x0, batch, rng.upper);
  st.queries += storm_level_init(st.lower, *problem.lower, x0, batch, rng.lower);
  return st;
}

/// One recursive-momentum update at x_t. The same draws are evaluated at x_t
/// and at the previous point; the value estimate reuses the lower draws.
inline void storm_step(StormState& st, const Vector& x_t, const BilevelProblem& problem,
                       LevelStreams& rng, double alpha, double beta, double rho, long batch = 1) {
  require(alpha > 0 && alpha <= 1 && beta > 0 && beta <= 1 && rho > 0 && rho <= 1,
          "STORM weights must lie in (0, 1]");
  require(batch >= 1, "batch size must be at least 1");
  require_same_size(x_t, st.prev_point, "STORM point");
  st.queries += storm_level_step(st.upper, *problem.upper, x_t, st.prev_point, alpha, alpha, batch,
                                 rng.upper, false);
  st.queries += storm_level_step(st.lower, *problem.lower, x_t, st.prev_point, beta, rho, batch,
                                 rng.lower, true);
  st.prev_point = x_t;
  ++st.t;
}

struct SpiderState {
  Vector prev_point;
  LevelEstimate upper;
  LevelEstimate lower;
  long t = 0;  // index of the next step
  long q_u = 1, S_u = 1;
  long q_l = 1, S_l = 1;
  std::int64_t queries = 0;

  const Vector& grad_f_est() const { return upper.grad; }
  const Vector& grad_g_est() const { return lower.grad; }
  double g_val_est() const { return lower.value; }
};

inline long sqrt_size(Index n) {
  return std::max(1L, static_cast<long>(std::lround(std::sqrt(static_cast<double>(n)))));
}

inline void require_finite_sum(const StochasticOracle& o) {
  if (o.kind() != OracleKind::kFiniteSum) throw Unsupported("SPIDER needs finite-sum oracles");
}

/// Epoch and batch sizes default to round(sqrt(n)) per level; positive
/// arguments override both levels.
inline SpiderState spider_init(const Vector& x0, const BilevelProblem& problem, long q = 0,
                               long S = 0) {
  require_finite_sum(*problem.upper);
  require_finite_sum(*problem.lower);
  require(q >= 0 && S >= 0, "epoch and batch sizes must be nonnegative");
  SpiderState st;
  st.prev_point = x0;
  st.upper.grad = Vector::Zero(x0.size());
  st.lower.grad = Vector::Zero(x0.size());
  st.q_u = q > 0 ? q : sqrt_size(problem.upper->num_components());
  st.q_l = q > 0 ? q : sqrt_size(problem.lower->num_components());
  st.S_u = S > 0 ? S : sqrt_size(problem.upper->num_components());
  st.S_l = S > 0 ? S : sqrt_size(problem.lower->num_components());
  return st;
}

/// Full refresh when t is a multiple of the level's epoch length, otherwise a
/// same-batch correction between prev_point and x_t.
inline void spider_step(SpiderState& st, const Vector& x_t, const BilevelProblem& problem,
                        LevelStreams& rng) {
  require_finite_sum(*problem.upper);
  require_finite_sum(*problem.lower);
  require_same_size(x_t, st.prev_point, "SPIDER point");
  st.queries += spider_level_step(st.upper, *problem.upper, x_t, st.prev_point, st.t % st.q_u == 0,
                                  st.S_u, rng.upper, false);
  st.queries += spider_level_step(st.lower, *problem.lower, x_t, st.prev_point, st.t % st.q_l == 0,
                                  st.S_l, rng.lower, true);
  st.prev_point = x_t;
  ++st.t;
}

/// s_t = sum_{tau=2}^{t} (rho_tau prod_{k=tau}^{t} (1 - rho_k))^2 with
/// rho_k = (k+1)^-omega, evaluated by s_{t+1} = (1 - rho_{t+1})^2 (s_t + rho_{t+1}^2).
inline double support_seq_st(long t, double omega) {
  require(t >= 2, "support sequence starts at t = 2");
  require(omega > 0 && omega <= 1, "omega must lie in (0, 1]");
  const double a = std::pow(3.0, omega);
  double s = (a - 1.0) * (a - 1.0) / (a * a * a * a);
  for (long k = 3; k <= t; ++k) {
    const double rho = std::pow(static_cast<double>(k + 1), -omega);
    s = (1.0 - rho) * (1.0 - rho) * (s + rho * rho);
  }
  return s;
}

}  // namespace sbcg
