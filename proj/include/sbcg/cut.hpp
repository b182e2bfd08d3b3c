#pragma once

#include <cmath>

#include "sbcg/types.hpp"

namespace sbcg {

/// Smoothness, Lipschitz and noise scales of a bilevel instance.
struct ProblemConstants {
  double L_f = 1.0;      // upper gradient smoothness
  double L_g = 1.0;      // lower gradient smoothness
  double L_l = 1.0;      // Lipschitz constant of lower sample values on Z
  double sigma_f = 0.0;  // sub-Gaussian gradient noise, upper
  double sigma_g = 0.0;  // sub-Gaussian gradient noise, lower
  double sigma_l = 0.0;  // sub-Gaussian value noise, lower
  double D = 1.0;        // diameter of Z

  void validate() const {
    require(L_f > 0 && L_g > 0 && L_l > 0, "smoothness/Lipschitz constants must be positive");
    require(sigma_f >= 0 && sigma_g >= 0 && sigma_l >= 0, "noise scales must be nonnegative");
    require(D > 0 && std::isfinite(D), "diameter must be positive");
  }
};

/// Halfspace { s : <normal, s - anchor> <= offset }.
struct CutPlane {
  Vector normal;
  Vector anchor;
  double offset = 0.0;

  double violation(const Vector& s) const { return normal.dot(s - anchor) - offset; }
};

inline CutPlane make_cut_plane(const Vector& grad_g_est, double g_est, double g_x0, double k_t,
                               const Vector& anchor) {
  require_same_size(grad_g_est, anchor, "cut normal vs anchor");
  if (!grad_g_est.allFinite() || !anchor.allFinite() || !std::isfinite(g_est) ||
      !std::isfinite(g_x0) || !std::isfinite(k_t)) {
    throw InvalidArgument("cut plane inputs must be finite");
  }
  require(k_t >= 0, "cut slack K_t must be nonnegative");
  return CutPlane{grad_g_est, anchor, g_x0 - g_est + k_t};
}

inline bool cut_contains(const CutPlane& plane, const Vector& s, double tol) {
  require_same_size(plane.normal, s, "cut membership");
  require(tol >= 0, "tolerance must be nonnegative");
  return plane.violation(s) <= tol;
}

/// Cut slack for the STORM-based method with alpha_t = (t+1)^-omega.
///
/// omega == 1 (convex upper level):
///   c((2 L_l D + 3/2 s_l) sqrt(2 log(6t/delta)) + D (2 L_g D + 3/2 s_g) sqrt(2 log(6td/delta))) / sqrt(t+1)
/// omega == 2/3 (nonconvex upper level): factor 3^w/(3^w - 1), logs use the
///   horizon T instead of t, decay (t+1)^(-1/3).
/// At t = 0 the convex logs are evaluated at t = 1 so K_0 stays finite.
inline double kt_sbcgi(const ProblemConstants& k, long t, double delta, long d, double omega,
                       long horizon, double abs_const) {
  require(t >= 0, "iteration index must be nonnegative");
  require(delta > 0 && delta < 1, "delta must lie in (0, 1)");
  require(d >= 1, "dimension must be positive");
  require(abs_const >= 0, "absolute constant must be nonnegative");
  const bool convex = std::abs(omega - 1.0) < 1e-12;
  const bool nonconvex = std::abs(omega - 2.0 / 3.0) < 1e-12;
  if (!convex && !nonconvex) throw InvalidArgument("kt_sbcgi supports omega = 1 or omega = 2/3");
  const double w_factor = std::pow(3.0, omega) / (std::pow(3.0, omega) - 1.0);
  double clock = 0.0;
  if (convex) {
    clock = static_cast<double>(std::max(t, 1L));
  } else {
    require(horizon >= 1, "horizon must be positive");
    clock = static_cast<double>(horizon);
  }
  const double dd = static_cast<double>(d);
  const double value_term =
      (2.0 * k.L_l * k.D + w_factor * k.sigma_l) * std::sqrt(2.0 * std::log(6.0 * clock / delta));
  const double grad_term = k.D * (2.0 * k.L_g * k.D + w_factor * k.sigma_g) *
                           std::sqrt(2.0 * std::log(6.0 * clock * dd / delta));
  const double decay = std::pow(static_cast<double>(t) + 1.0, convex ? -0.5 : -1.0 / 3.0);
  return abs_const * (value_term + grad_term) * decay;
}

/// Constant cut slack for the SPIDER-based method: 4 D (L_l + L_g D) sqrt(log(12T/delta)) gamma.
inline double kt_sbcgf(const ProblemConstants& k, double gamma, double delta, long horizon) {
  require(gamma >= 0 && gamma <= 1, "gamma must lie in [0, 1]");
  require(delta > 0 && delta < 1, "delta must lie in (0, 1)");
  require(horizon >= 2, "horizon must be at least 2");
  return 4.0 * k.D * (k.L_l + k.L_g * k.D) *
         std::sqrt(std::log(12.0 * static_cast<double>(horizon) / delta)) * gamma;
}

}  // namespace sbcg
