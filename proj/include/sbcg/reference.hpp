#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "sbcg/constrained_lmo.hpp"
#include "sbcg/problem.hpp"

namespace sbcg {

struct ReferenceConfig {
  double g_gap_tol = 1e-9;
  double f_gap_tol = 1e-8;
  long max_iterations = 200000;
  long cg_bio_iterations = 5000;  // deterministic estimate of f* when X_g* is not analytic
};

struct ApgResult {
  Vector x;
  double value = kNaN;
  double gap = kNaN;  // Frank-Wolfe duality gap, an upper bound on value - min
  long iterations = 0;
  bool converged = false;
};

/// Accelerated projected gradient with backtracking and gradient-based
/// restarts, stopped by the Frank-Wolfe duality gap. Both the step test and
/// the restart test use gradients only, so progress does not stall when
/// function values stop resolving differences near the optimum.
inline ApgResult minimize_apg(const std::function<double(const Vector&)>& f,
                              const std::function<Vector(const Vector&)>& grad,
                              const FeasibleSet& set, const Vector& x_start, double gap_tol,
                              long max_iterations) {
  ApgResult r;
  Vector x = project(set, x_start);
  Vector y = x;
  double L = 1.0;
  double theta = 1.0;
  auto fw_gap = [&](const Vector& at, const Vector& g) { return g.dot(at - lmo(set, g)); };
  for (long k = 0; k < max_iterations; ++k) {
    const Vector gy = grad(y);
    Vector next;
    while (true) {
      next = project(set, y - gy / L);
      const Vector d = next - y;
      const double dd = d.squaredNorm();
      if (dd == 0.0 || (grad(next) - gy).dot(d) <= L * dd) break;
      L *= 2.0;
      if (!std::isfinite(L)) throw ReferenceFailure("step-size search diverged", kNaN);
    }
    if ((y - next).dot(next - x) > 0) {
      theta = 1.0;
      y = next;
    } else {
      const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
      y = next + ((theta - 1.0) / theta_next) * (next - x);
      theta = theta_next;
    }
    x = next;
    L *= 0.9;
    r.iterations = k + 1;
    if (k % 10 == 0) {
      const double gap = fw_gap(x, grad(x));
      if (gap <= gap_tol) {
        r.x = x;
        r.value = f(x);
        r.gap = gap;
        r.converged = true;
        return r;
      }
    }
  }
  r.x = x;
  r.value = f(x);
  r.gap = fw_gap(x, grad(x));
  r.converged = r.gap <= gap_tol;
  return r;
}

struct CgBioResult {
  Vector x;
  double f_value = kNaN;
  double surrogate_gap = kNaN;
};

/// Deterministic cutting-plane conditional gradient with exact gradients and
/// values: s_t minimizes <grad f, s> over Z cut by
/// <grad g(x_t), s - x_t> <= g(x0) - g(x_t); step 2/(t+2).
inline CgBioResult deterministic_cg_bio(const BilevelProblem& p, const Vector& x0, long iterations) {
  const double g_x0 = p.lower->full_value(x0);
  Vector x = x0;
  CgBioResult r;
  for (long t = 0; t < iterations; ++t) {
    const Vector gf = p.upper->full_grad(x);
    const CutPlane plane = make_cut_plane(p.lower->full_grad(x), p.lower->full_value(x), g_x0, 0.0, x);
    Vector s;
    try {
      s = constrained_lmo(p.set, gf, plane);
    } catch (const InfeasibleCut&) {
      s = lmo(p.set, plane.normal);
    }
    r.surrogate_gap = gf.dot(x - s);
    const double g = 2.0 / (static_cast<double>(t) + 2.0);
    x = (1.0 - g) * x + g * s;
  }
  r.x = x;
  r.f_value = p.upper->full_value(x);
  return r;
}

/// Lower optimum by accelerated projected gradient on the full lower
/// objective, certified by the duality gap.
inline ApgResult lower_level_optimum(const BilevelProblem& p, const Vector& x_start,
                                     const ReferenceConfig& cfg) {
  if (!p.lower->has_exact()) throw Unsupported("reference values need an exact lower objective");
  const auto f = [&](const Vector& x) { return p.lower->full_value(x); };
  const auto g = [&](const Vector& x) { return p.lower->full_grad(x); };
  ApgResult r = minimize_apg(f, g, p.set, x_start, cfg.g_gap_tol, cfg.max_iterations);
  if (!r.converged) throw ReferenceFailure("lower-level reference did not reach its gap tolerance", r.gap);
  return r;
}

/// f* over the analytic solution set by Frank-Wolfe with exact line search on
/// the segment (for quadratic or linear f a golden-section search is exact
/// enough), certified by the duality gap.
inline std::pair<double, double> upper_over_solution_set(const BilevelProblem& p, const Vector& x_start,
                                                         const ReferenceConfig& cfg) {
  Vector x = p.solution_set_lmo(p.upper->full_grad(x_start));
  double gap = kNaN;
  for (long t = 0; t < cfg.max_iterations; ++t) {
    const Vector gf = p.upper->full_grad(x);
    const Vector s = p.solution_set_lmo(gf);
    gap = gf.dot(x - s);
    if (gap <= cfg.f_gap_tol) return {p.upper->full_value(x), std::max(gap, 1e-15)};
    const Vector d = s - x;
    double lo = 0.0, hi = 1.0;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int k = 0; k < 100; ++k) {
      const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
      if (p.upper->full_value(x + a * d) <= p.upper->full_value(x + b * d)) {
        hi = b;
      } else {
        lo = a;
      }
    }
    x += 0.5 * (lo + hi) * d;
  }
  throw ReferenceFailure("upper-level reference did not reach its gap tolerance", gap);
}

/// g* and f* for a finite-sum problem. f* is exact over X_g* when the problem
/// exposes it, otherwise a long deterministic cutting-plane run started from
/// the lower optimum, with tolerance set to its final surrogate gap.
inline ReferenceValues reference_values(const BilevelProblem& p, const Vector& x_start,
                                        const ReferenceConfig& cfg = {}) {
  p.validate();
  ReferenceValues refs;
  const ApgResult low = lower_level_optimum(p, x_start, cfg);
  refs.g_star = low.value;
  refs.tolerance = std::max(low.gap, 1e-15);
  if (p.solution_set_lmo) {
    const auto [f_star, tol] = upper_over_solution_set(p, low.x, cfg);
    refs.f_star = f_star;
    refs.f_tolerance = tol;
  } else {
    const CgBioResult est = deterministic_cg_bio(p, low.x, cfg.cg_bio_iterations);
    refs.f_star = est.f_value;
    refs.f_tolerance = std::abs(est.surrogate_gap);
  }
  return refs;
}

}  // namespace sbcg
