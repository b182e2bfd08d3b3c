#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sbcg/types.hpp"

namespace sbcg {

// Identifies one random draw. For finite-sum oracles it is the component
// index; for streaming oracles it seeds the noise, so evaluating the same
// Sample at two points reuses the same realization.
using Sample = std::uint64_t;

enum class OracleKind { kFiniteSum, kStreaming };

/// Access to a stochastic objective F(x) = E[F~(x, sample)].
///
/// Finite-sum oracles represent F(x) = (1/n) sum_i F~(x, i) and draw indices
/// uniformly with replacement. Streaming oracles draw opaque seeds and may
/// optionally expose the expectation (`has_exact()`), which solvers never use
/// for updates but metric evaluation may.
class StochasticOracle {
 public:
  virtual ~StochasticOracle() = default;

  virtual Index dimension() const = 0;
  virtual OracleKind kind() const = 0;
  // Number of components for finite-sum oracles, 0 for streaming.
  virtual Index num_components() const { return 0; }

  virtual Sample draw(Rng& rng) const {
    if (kind() == OracleKind::kFiniteSum) {
      std::uniform_int_distribution<Index> pick(0, num_components() - 1);
      return static_cast<Sample>(pick(rng));
    }
    return rng();
  }

  virtual double value(const Vector& x, Sample s) const = 0;
  // out += weight * grad F~(x, s)
  virtual void accumulate_grad(const Vector& x, Sample s, double weight, Vector& out) const = 0;

  // Returns F~(x, s) and accumulates its gradient; overridden where the
  // residual can be shared between the two.
  virtual double value_and_accumulate_grad(const Vector& x, Sample s, double weight,
                                           Vector& out) const {
    accumulate_grad(x, s, weight, out);
    return value(x, s);
  }

  bool has_exact() const { return kind() == OracleKind::kFiniteSum || has_expectation(); }

  // Full pass over components, or the analytic expectation of a streaming oracle.
  virtual double full_value(const Vector& x) const {
    require_exact();
    const Index n = num_components();
    std::vector<double> terms(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) terms[static_cast<std::size_t>(i)] = value(x, static_cast<Sample>(i));
    return pairwise_sum(terms) / static_cast<double>(n);
  }

  virtual Vector full_grad(const Vector& x) const {
    require_exact();
    return pairwise_grad(x, 0, num_components()) / static_cast<double>(num_components());
  }

  Vector sample_grad(const Vector& x, Sample s) const {
    Vector g = Vector::Zero(dimension());
    accumulate_grad(x, s, 1.0, g);
    return g;
  }

  static double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
      double acc = 0.0;
      for (double t : v) acc += t;
      return acc;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
  }

 protected:
  virtual bool has_expectation() const { return false; }

  void require_exact() const {
    if (!has_exact()) throw Unsupported("full pass requested on a streaming oracle");
  }

 private:
  Vector pairwise_grad(const Vector& x, Index begin, Index end) const {
    if (end - begin <= 8) {
      Vector g = Vector::Zero(dimension());
      for (Index i = begin; i < end; ++i) accumulate_grad(x, static_cast<Sample>(i), 1.0, g);
      return g;
    }
    const Index mid = begin + (end - begin) / 2;
    return pairwise_grad(x, begin, mid) + pairwise_grad(x, mid, end);
  }
};

}  // namespace sbcg
