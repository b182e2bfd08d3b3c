#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sbcg/constrained_lmo.hpp"
#include "sbcg/estimators.hpp"
#include "sbcg/problem.hpp"

namespace sbcg {

/// scale * (t+1)^-power; power 0 gives a constant.
struct StepSchedule {
  double scale = 1.0;
  double power = 1.0;

  double operator()(long t) const { return scale * std::pow(static_cast<double>(t) + 1.0, -power); }
};

enum class KtMode { kTheorem, kManual, kZero };

/// Cut slack. kTheorem uses the closed forms in cut.hpp (scaled by
/// abs_const); kManual is kappa * (t+1)^-power.
struct KtSchedule {
  KtMode mode = KtMode::kTheorem;
  double abs_const = 1.0;
  double kappa = 0.0;
  double power = 0.5;
};

struct ArIpSegParams {
  double gamma0 = 1e-7;
  double rho0 = 1e3;
  double r = 1.0;
};

struct DbgdParams {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 1e-6;
  double g_lower = 0.0;  // the lower bound g-hat in phi
};

struct SolverConfig {
  double eps_f = 1e-2;
  double eps_g = 1e-2;
  double delta = 0.1;
  double omega = 1.0;  // STORM weights alpha_t = beta_t = rho_t = (t+1)^-omega
  long horizon = 1000;
  std::int64_t query_budget = 0;  // 0 disables the budget
  StepSchedule gamma{1.0, 1.0};
  long batch = 1;
  long spider_q = 0;  // 0: round(sqrt(n)) per level
  long spider_S = 0;
  KtSchedule kt;
  std::uint64_t seed = 0;
  std::int64_t warm_start_budget = 100000;
  StepSchedule warm_gamma{0.1, 1.0};
  long log_points = 500;
  bool record_timing = true;
  long value_batch = 0;  // metric sampling for streaming oracles without an expectation
  ArIpSegParams aripseg;
  DbgdParams dbgd;

  void validate() const {
    require(eps_f > 0 && eps_g > 0, "target accuracies must be positive");
    require(delta > 0 && delta < 1, "delta must lie in (0, 1)");
    require(omega > 0 && omega <= 1, "omega must lie in (0, 1]");
    require(horizon >= 0, "horizon must be nonnegative");
    require(query_budget >= 0 && warm_start_budget >= 0, "budgets must be nonnegative");
    require(gamma.scale > 0 && gamma.scale <= 1 && gamma.power >= 0,
            "step schedule must produce values in (0, 1]");
    require(warm_gamma.scale > 0 && warm_gamma.scale <= 1 && warm_gamma.power >= 0,
            "warm-start step schedule must produce values in (0, 1]");
    require(batch >= 1, "batch size must be at least 1");
    require(spider_q >= 0 && spider_S >= 0, "SPIDER sizes must be nonnegative");
    require(kt.abs_const >= 0 && kt.kappa >= 0 && kt.power >= 0, "cut slack parameters must be nonnegative");
    require(log_points >= 1, "log_points must be positive");
    require(aripseg.gamma0 >= 0 && aripseg.rho0 >= 0 && aripseg.r > 0, "invalid aR-IP-SeG parameters");
    require(dbgd.alpha >= 0 && dbgd.beta >= 0 && dbgd.gamma >= 0, "invalid DBGD parameters");
  }
};

enum class RunStatus { kCompleted, kCompletedWithFallbacks, kError };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kCompleted:
      return "completed";
    case RunStatus::kCompletedWithFallbacks:
      return "completed-with-fallbacks";
    case RunStatus::kError:
      return "error";
  }
  return "unknown";
}

struct RunTrace {
  std::string algorithm;
  std::vector<MetricsRecord> records;
  Vector final_x;
  RunStatus status = RunStatus::kCompleted;
  long fallbacks = 0;
  bool infeasible_cut = false;  // stopped because a cut left Z empty
  long iterations = 0;
  std::int64_t queries = 0;
  std::string fw_gap_kind = "none";  // exact | surrogate | none
  std::string message;
};

struct RunHooks {
  std::function<void(long, const CutPlane&)> on_cut;
  std::function<void(long, const Vector&)> on_iterate;  // x_t before the update
};

/// Warm start: x0 with g(x0) computed per the oracle kind, plus the queries spent.
struct StartPoint {
  Vector x0;
  double g_x0 = kNaN;
  std::int64_t queries = 0;
};

namespace detail {

class TraceRecorder {
 public:
  TraceRecorder(const BilevelProblem& p, const ReferenceValues& refs, const SolverConfig& cfg,
                double expected_iterations, RunTrace& trace)
      : p_(p), refs_(refs), cfg_(cfg), trace_(trace), start_(std::chrono::steady_clock::now()) {
    const double n = std::max(1.0, expected_iterations);
    every_ = std::max(1L, static_cast<long>(std::ceil(n / static_cast<double>(cfg.log_points))));
  }

  bool due(long t) const { return t % every_ == 0; }

  void record(long t, const Vector& x, std::int64_t queries, long fallbacks, double fw_surrogate) {
    if (last_ == t) return;
    MetricSpec spec{cfg_.value_batch, cfg_.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(t + 1))};
    MetricsRecord r = evaluate_metrics(x, p_, refs_, spec);
    if (std::isnan(r.fw_gap)) r.fw_gap = fw_surrogate;
    r.iteration = t;
    r.oracle_queries = queries;
    r.cut_fallback_count = fallbacks;
    if (cfg_.record_timing) {
      r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }
    trace_.records.push_back(r);
    last_ = t;
  }

 private:
  const BilevelProblem& p_;
  const ReferenceValues& refs_;
  const SolverConfig& cfg_;
  RunTrace& trace_;
  std::chrono::steady_clock::time_point start_;
  long every_ = 1;
  long last_ = -1;
};

inline double expected_iterations(const SolverConfig& cfg, std::int64_t start_queries,
                                  double queries_per_iteration) {
  double n = static_cast<double>(cfg.horizon);
  if (cfg.query_budget > 0) {
    const double left = static_cast<double>(std::max<std::int64_t>(0, cfg.query_budget - start_queries));
    n = std::min(n, std::ceil(left / std::max(1.0, queries_per_iteration)));
  }
  return n;
}

inline bool out_of_budget(const SolverConfig& cfg, long t, std::int64_t queries) {
  return t >= cfg.horizon || (cfg.query_budget > 0 && queries >= cfg.query_budget);
}

inline double spider_queries_per_iteration(Index n, long q, long S) {
  return (static_cast<double>(n) + 2.0 * static_cast<double>(S) * static_cast<double>(q - 1)) /
         static_cast<double>(q);
}

class StormEstimator {
 public:
  StormEstimator(const BilevelProblem& p, const SolverConfig& cfg, Rng& rng)
      : p_(p), omega_(cfg.omega), batch_(cfg.batch), streams_(rng) {}

  void advance(const Vector& x, long t) {
    if (t == 0) {
      st_ = storm_init(x, p_, streams_, batch_);
    } else {
      const double a = std::pow(static_cast<double>(t) + 1.0, -omega_);
      storm_step(st_, x, p_, streams_, a, a, a, batch_);
    }
  }
  const Vector& grad_f() const { return st_.grad_f_est(); }
  const Vector& grad_g() const { return st_.grad_g_est(); }
  double g_val() const { return st_.g_val_est(); }
  std::int64_t queries() const { return st_.queries; }
  double per_iteration() const { return 4.0 * static_cast<double>(batch_); }

 private:
  const BilevelProblem& p_;
  double omega_;
  long batch_;
  LevelStreams streams_;
  StormState st_;
};

class SpiderEstimator {
 public:
  SpiderEstimator(const BilevelProblem& p, const SolverConfig& cfg, const Vector& x0, Rng& rng)
      : p_(p), streams_(rng), st_(spider_init(x0, p, cfg.spider_q, cfg.spider_S)) {}

  void advance(const Vector& x, long) { spider_step(st_, x, p_, streams_); }
  const Vector& grad_f() const { return st_.grad_f_est(); }
  const Vector& grad_g() const { return st_.grad_g_est(); }
  double g_val() const { return st_.g_val_est(); }
  std::int64_t queries() const { return st_.queries; }
  double per_iteration() const {
    return spider_queries_per_iteration(p_.upper->num_components(), st_.q_u, st_.S_u) +
           spider_queries_per_iteration(p_.lower->num_components(), st_.q_l, st_.S_l);
  }
  const SpiderState& state() const { return st_; }

 private:
  const BilevelProblem& p_;
  LevelStreams streams_;
  SpiderState st_;
};

template <typename Estimator>
RunTrace bilevel_cg_loop(std::string name, const BilevelProblem& p, const ReferenceValues& refs,
                         const SolverConfig& cfg, const StartPoint& start, Estimator& est,
                         const std::function<double(long)>& slack, bool fallback,
                         const RunHooks& hooks) {
  RunTrace tr;
  tr.algorithm = std::move(name);
  tr.fw_gap_kind = p.solution_set_lmo ? "exact" : "surrogate";
  TraceRecorder rec(p, refs, cfg, expected_iterations(cfg, start.queries, est.per_iteration()), tr);
  Vector x = start.x0;
  std::int64_t queries = start.queries;
  long t = 0;
  for (; !out_of_budget(cfg, t, queries); ++t) {
    est.advance(x, t);
    queries = start.queries + est.queries();
    if (hooks.on_iterate) hooks.on_iterate(t, x);
    const CutPlane plane = make_cut_plane(est.grad_g(), est.g_val(), start.g_x0, slack(t), x);
    if (hooks.on_cut) hooks.on_cut(t, plane);
    Vector s;
    double surrogate = kNaN;
    try {
      s = constrained_lmo(p.set, est.grad_f(), plane);
      surrogate = est.grad_f().dot(x - s);
    } catch (const InfeasibleCut& e) {
      if (!fallback) {
        tr.status = RunStatus::kError;
        tr.infeasible_cut = true;
        tr.message = e.what();
        break;
      }
      s = lmo(p.set, est.grad_g());
      ++tr.fallbacks;
    } catch (const Error& e) {
      tr.status = RunStatus::kError;
      tr.message = e.what();
      break;
    }
    if (rec.due(t)) rec.record(t, x, queries, tr.fallbacks, surrogate);
    const double g = cfg.gamma(t + 1);
    x = (1.0 - g) * x + g * s;
  }
  rec.record(t, x, queries, tr.fallbacks, kNaN);
  if (tr.status != RunStatus::kError && tr.fallbacks > 0) tr.status = RunStatus::kCompletedWithFallbacks;
  tr.final_x = x;
  tr.iterations = t;
  tr.queries = queries;
  return tr;
}

inline void check_start(const BilevelProblem& p, const SolverConfig& cfg, const StartPoint& start) {
  p.validate();
  cfg.validate();
  if (start.x0.size() != p.dimension()) throw InvalidArgument("start point dimension mismatch");
  if (!std::isfinite(start.g_x0)) throw InvalidArgument("start point needs a finite g(x0)");
  if (!p.set.contains(start.x0, 1e-9)) throw InvalidArgument("start point is outside the feasible set");
}

}  // namespace detail

/// SBCGI: STORM estimators, diminishing step and cut slack.
inline RunTrace sbcgi_run(const BilevelProblem& p, const SolverConfig& cfg, const StartPoint& start,
                          Rng& rng, const ReferenceValues& refs, const RunHooks& hooks = {}) {
  detail::check_start(p, cfg, start);
  detail::StormEstimator est(p, cfg, rng);
  const double d = static_cast<double>(p.dimension());
  auto slack = [&](long t) -> double {
    switch (cfg.kt.mode) {
      case KtMode::kTheorem:
        return kt_sbcgi(p.constants, t, cfg.delta, static_cast<long>(d), cfg.omega,
                        std::max(1L, cfg.horizon), cfg.kt.abs_const);
      case KtMode::kManual:
        return cfg.kt.kappa * std::pow(static_cast<double>(t) + 1.0, -cfg.kt.power);
      case KtMode::kZero:
        return 0.0;
    }
    return 0.0;
  };
  return detail::bilevel_cg_loop("SBCGI", p, refs, cfg, start, est, slack, false, hooks);
}

/// SBCGF: SPIDER estimators with full refreshes every q steps.
inline RunTrace sbcgf_run(const BilevelProblem& p, const SolverConfig& cfg, const StartPoint& start,
                          Rng& rng, const ReferenceValues& refs, const RunHooks& hooks = {}) {
  detail::check_start(p, cfg, start);
  detail::SpiderEstimator est(p, cfg, start.x0, rng);
  auto slack = [&](long t) -> double {
    switch (cfg.kt.mode) {
      case KtMode::kTheorem:
        return kt_sbcgf(p.constants, cfg.gamma(t), cfg.delta, std::max(2L, cfg.horizon)) *
               cfg.kt.abs_const;
      case KtMode::kManual:
        return cfg.kt.kappa * std::pow(static_cast<double>(t) + 1.0, -cfg.kt.power);
      case KtMode::kZero:
        return 0.0;
    }
    return 0.0;
  };
  return detail::bilevel_cg_loop("SBCGF", p, refs, cfg, start, est, slack, false, hooks);
}

enum class SbcgVariant { kSbcgi, kSbcgf };

/// Ablation: the unregularized cut (K_t = 0); an empty cut set falls back to
/// a lower-level step s_t = lmo(Z, grad g-hat_t) and is counted.
inline RunTrace sbcg_m_run(const BilevelProblem& p, const SolverConfig& cfg, const StartPoint& start,
                           Rng& rng, const ReferenceValues& refs, SbcgVariant variant,
                           const RunHooks& hooks = {}) {
  detail::check_start(p, cfg, start);
  auto zero = [](long) { return 0.0; };
  if (variant == SbcgVariant::kSbcgi) {
    detail::StormEstimator est(p, cfg, rng);
    return detail::bilevel_cg_loop("SBCGI-M", p, refs, cfg, start, est, zero, true, hooks);
  }
  detail::SpiderEstimator est(p, cfg, start.x0, rng);
  return detail::bilevel_cg_loop("SBCGF-M", p, refs, cfg, start, est, zero, true, hooks);
}

enum class Level { kUpper, kLower };
enum class EstimatorKind { kStorm, kSpider };

/// Projection-free method on a single level (STORM-FW or SPIDER-FW). The
/// trace reports the bilevel metrics of the iterates.
inline RunTrace fw_single_level_run(const BilevelProblem& p, Level level, const SolverConfig& cfg,
                                    const Vector& x_start, std::int64_t start_queries, Rng& rng,
                                    const ReferenceValues& refs, EstimatorKind kind,
                                    bool record = true) {
  cfg.validate();
  const StochasticOracle& o = level == Level::kLower ? *p.lower : *p.upper;
  if (x_start.size() != p.dimension()) throw InvalidArgument("start point dimension mismatch");
  RunTrace tr;
  tr.algorithm = kind == EstimatorKind::kStorm ? "STORM-FW" : "SPIDER-FW";
  Rng stream(rng());  // same stream an SBCG run would use for its upper level

  long q = 1, S = 1;
  double per_it = 2.0 * static_cast<double>(cfg.batch);
  if (kind == EstimatorKind::kSpider) {
    require_finite_sum(o);
    q = cfg.spider_q > 0 ? cfg.spider_q : sqrt_size(o.num_components());
    S = cfg.spider_S > 0 ? cfg.spider_S : sqrt_size(o.num_components());
    per_it = detail::spider_queries_per_iteration(o.num_components(), q, S);
  }
  std::optional<detail::TraceRecorder> rec;
  if (record) rec.emplace(p, refs, cfg, detail::expected_iterations(cfg, start_queries, per_it), tr);

  Vector x = x_start;
  Vector prev = x_start;
  LevelEstimate est;
  std::int64_t queries = start_queries;
  long t = 0;
  for (; !detail::out_of_budget(cfg, t, queries); ++t) {
    if (kind == EstimatorKind::kStorm) {
      if (t == 0) {
        queries += storm_level_init(est, o, x, cfg.batch, stream);
      } else {
        const double a = std::pow(static_cast<double>(t) + 1.0, -cfg.omega);
        queries += storm_level_step(est, o, x, prev, a, a, cfg.batch, stream, false);
      }
    } else {
      queries += spider_level_step(est, o, x, prev, t % q == 0, S, stream, false);
    }
    prev = x;
    const Vector s = lmo(p.set, est.grad);
    if (rec && rec->due(t)) rec->record(t, x, queries, 0, kNaN);
    const double g = cfg.gamma(t + 1);
    x = (1.0 - g) * x + g * s;
  }
  if (rec) rec->record(t, x, queries, 0, kNaN);
  tr.final_x = x;
  tr.iterations = t;
  tr.queries = queries;
  return tr;
}

/// Finds x0 with g(x0) - g* <= eps_g/2 by single-level FW on the lower
/// objective, then evaluates g(x0): a full pass for finite sums, a batch of
/// min(ceil(eps_g^-2), 1e6) samples for streams. Pass g_star when known to
/// verify the gap.
inline StartPoint warm_start_x0(const BilevelProblem& p, const SolverConfig& cfg,
                                const Vector& x_start, Rng& rng,
                                std::optional<double> g_star = std::nullopt) {
  p.validate();
  cfg.validate();
  if (!p.set.contains(x_start, 1e-9)) throw InvalidArgument("warm start begins outside the feasible set");
  const StochasticOracle& g = *p.lower;
  Vector x = x_start;
  std::int64_t queries = 0;

  const bool already = g_star && g.has_exact() && g.full_value(x) - *g_star <= cfg.eps_g / 2;
  if (!already && cfg.warm_start_budget > 0) {
    SolverConfig warm = cfg;
    warm.gamma = cfg.warm_gamma;
    warm.query_budget = cfg.warm_start_budget;
    warm.horizon = std::numeric_limits<long>::max();
    const EstimatorKind kind =
        g.kind() == OracleKind::kFiniteSum ? EstimatorKind::kSpider : EstimatorKind::kStorm;
    const ReferenceValues none;
    const RunTrace tr = fw_single_level_run(p, Level::kLower, warm, x, 0, rng, none, kind, false);
    x = tr.final_x;
    queries = tr.queries;
  }

  StartPoint out;
  out.x0 = x;
  if (g.kind() == OracleKind::kFiniteSum) {
    out.g_x0 = g.full_value(x);
    queries += g.num_components();
  } else {
    const double b = std::min(1e6, std::ceil(1.0 / (cfg.eps_g * cfg.eps_g)));
    Rng value_rng(rng());
    double acc = 0.0;
    const long nb = static_cast<long>(b);
    for (long i = 0; i < nb; ++i) acc += g.value(x, g.draw(value_rng));
    out.g_x0 = acc / b;
    queries += nb;
  }
  out.queries = queries;

  if (g_star && g.has_exact()) {
    const double gap = g.full_value(x) - *g_star;
    if (gap > cfg.eps_g / 2) {
      throw WarmStartFailure("warm start did not reach eps_g/2 within its budget", gap);
    }
  }
  return out;
}

/// Step weight lambda of dynamic barrier gradient descent:
/// max((phi - <gf, gg>)/||gg||^2, 0) with phi = min(alpha (g - g_lower), beta ||gg||^2).
inline double dbgd_lambda(const Vector& gf, const Vector& gg, double g_minus_lower, double alpha,
                          double beta) {
  const double nn = gg.squaredNorm();
  if (nn < 1e-14) return 0.0;
  const double phi = std::min(alpha * g_minus_lower, beta * nn);
  return std::max((phi - gf.dot(gg)) / nn, 0.0);
}

/// Stochastic DBGD with mini-batch gradients; each step is projected onto Z.
inline RunTrace dbgd_sto_run(const BilevelProblem& p, const SolverConfig& cfg, const Vector& x_start,
                             Rng& rng, const ReferenceValues& refs) {
  p.validate();
  cfg.validate();
  RunTrace tr;
  tr.algorithm = "DBGD-sto";
  tr.fw_gap_kind = p.solution_set_lmo ? "exact" : "none";
  LevelStreams streams(rng);
  detail::TraceRecorder rec(p, refs, cfg,
                            detail::expected_iterations(cfg, 0, 2.0 * static_cast<double>(cfg.batch)), tr);
  Vector x = project(p.set, x_start);
  std::int64_t queries = 0;
  long t = 0;
  for (; !detail::out_of_budget(cfg, t, queries); ++t) {
    if (rec.due(t)) rec.record(t, x, queries, 0, kNaN);
    const MinibatchEstimate up = minibatch_estimate(*p.upper, x, cfg.batch, streams.upper);
    const MinibatchEstimate lo = minibatch_estimate(*p.lower, x, cfg.batch, streams.lower);
    queries += 2 * cfg.batch;
    const double lam = dbgd_lambda(up.grad, lo.grad, lo.value - cfg.dbgd.g_lower, cfg.dbgd.alpha, cfg.dbgd.beta);
    x = project(p.set, x - cfg.dbgd.gamma * (up.grad + lam * lo.grad));
  }
  rec.record(t, x, queries, 0, kNaN);
  tr.final_x = x;
  tr.iterations = t;
  tr.queries = queries;
  return tr;
}

/// Averaged regularized iterative-penalty stochastic extragradient. The
/// traced iterate is the weighted average y-bar.
inline RunTrace aripseg_run(const BilevelProblem& p, const SolverConfig& cfg, const Vector& x_start,
                            Rng& rng, const ReferenceValues& refs) {
  p.validate();
  cfg.validate();
  RunTrace tr;
  tr.algorithm = "aR-IP-SeG";
  tr.fw_gap_kind = p.solution_set_lmo ? "exact" : "none";
  LevelStreams streams(rng);
  const ArIpSegParams& a = cfg.aripseg;
  detail::TraceRecorder rec(p, refs, cfg,
                            detail::expected_iterations(cfg, 0, 4.0 * static_cast<double>(cfg.batch)), tr);
  Vector x = project(p.set, x_start);
  Vector ybar = x;
  double Gamma = 0.0;
  std::int64_t queries = 0;
  long t = 0;
  auto direction = [&](const Vector& at, double rho) {
    const MinibatchEstimate up = minibatch_estimate(*p.upper, at, cfg.batch, streams.upper);
    const MinibatchEstimate lo = minibatch_estimate(*p.lower, at, cfg.batch, streams.lower);
    queries += 2 * cfg.batch;
    return Vector(up.grad + rho * lo.grad);
  };
  for (; !detail::out_of_budget(cfg, t, queries); ++t) {
    if (rec.due(t)) rec.record(t, ybar, queries, 0, kNaN);
    const double tt = static_cast<double>(t) + 1.0;
    const double gamma = a.gamma0 * std::pow(tt, -0.75);
    const double rho = a.rho0 * std::pow(tt, 0.25);
    const Vector y = project(p.set, x - gamma * direction(x, rho));
    x = project(p.set, x - gamma * direction(y, rho));
    const double w = std::pow(gamma * rho, a.r);
    if (Gamma + w > 0) ybar = (Gamma * ybar + w * y) / (Gamma + w);
    Gamma += w;
  }
  rec.record(t, ybar, queries, 0, kNaN);
  tr.final_x = ybar;
  tr.iterations = t;
  tr.queries = queries;
  return tr;
}

}  // namespace sbcg
