#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>

#include "sbcg/cut.hpp"
#include "sbcg/feasible_set.hpp"
#include "sbcg/oracle.hpp"

namespace sbcg {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Exact linear minimization over the lower-level solution set X_g*.
using SolutionSetLmo = std::function<Vector(const Vector&)>;
using TaskMetric = std::function<double(const Vector&)>;

/// min f(x) over x in argmin_{z in Z} g(z), with f and g stochastic.
struct BilevelProblem {
  std::string name;
  std::shared_ptr<const StochasticOracle> upper;
  std::shared_ptr<const StochasticOracle> lower;
  FeasibleSet set;
  ProblemConstants constants;
  SolutionSetLmo solution_set_lmo;  // empty when X_g* has no analytic description
  TaskMetric task_metric;           // empty when the instance has no task metric
  std::string task_metric_name = "none";

  Index dimension() const { return set.dimension(); }

  void validate() const {
    if (!upper || !lower) throw InvalidArgument("bilevel problem needs both oracles");
    if (upper->dimension() != lower->dimension() || upper->dimension() != set.dimension()) {
      throw InvalidArgument("oracle and set dimensions disagree");
    }
    constants.validate();
  }

  bool finite_sum() const {
    return upper->kind() == OracleKind::kFiniteSum && lower->kind() == OracleKind::kFiniteSum;
  }
};

struct ReferenceValues {
  double g_star = 0.0;
  double f_star = 0.0;
  double tolerance = 1e-9;    // accuracy of g_star
  double f_tolerance = 1e-8;  // accuracy of f_star
  double g_x0 = kNaN;
};

struct MetricsRecord {
  long iteration = 0;
  std::int64_t oracle_queries = 0;
  double g_gap = kNaN;
  double f_gap = kNaN;  // signed: iterates may sit slightly outside X_g*
  double fw_gap = kNaN;
  double task_metric = kNaN;
  double wall_ms = 0.0;
  long cut_fallback_count = 0;
};

/// <grad_f, x> - min_{s in X_g*} <grad_f, s>.
inline double fw_gap_exact(const Vector& x, const Vector& grad_f, const SolutionSetLmo& solset_lmo) {
  if (!solset_lmo) throw Unsupported("FW gap needs an exact solution-set oracle");
  require_same_size(x, grad_f, "fw gap");
  const Vector s = solset_lmo(grad_f);
  return grad_f.dot(x - s);
}

struct MetricSpec {
  // Samples per value estimate when an oracle has no exact pass; 0 forbids estimation.
  long value_batch = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double exact_or_estimated_value(const StochasticOracle& o, const Vector& x,
                                       const MetricSpec& spec, Rng& rng) {
  if (o.has_exact()) return o.full_value(x);
  if (spec.value_batch <= 0) {
    throw ConfigError("streaming oracle without an exact pass needs a value batch for metrics");
  }
  double acc = 0.0;
  for (long i = 0; i < spec.value_batch; ++i) acc += o.value(x, o.draw(rng));
  return acc / static_cast<double>(spec.value_batch);
}

}  // namespace detail

/// Gaps and the task metric at x. fw_gap is exact when the problem exposes
/// its solution set, NaN otherwise (solvers may fill in a surrogate).
inline MetricsRecord evaluate_metrics(const Vector& x, const BilevelProblem& problem,
                                      const ReferenceValues& refs, const MetricSpec& spec = {}) {
  if (x.size() != problem.dimension()) throw InvalidArgument("iterate dimension mismatch");
  Rng rng(spec.seed);
  MetricsRecord r;
  r.g_gap = detail::exact_or_estimated_value(*problem.lower, x, spec, rng) - refs.g_star;
  r.f_gap = detail::exact_or_estimated_value(*problem.upper, x, spec, rng) - refs.f_star;
  if (problem.solution_set_lmo && problem.upper->has_exact()) {
    r.fw_gap = fw_gap_exact(x, problem.upper->full_grad(x), problem.solution_set_lmo);
  }
  if (problem.task_metric) r.task_metric = problem.task_metric(x);
  return r;
}

}  // namespace sbcg
