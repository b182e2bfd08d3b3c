#pragma once

// Brute-force reference computations. None of these call into the library's
// solvers; they exist to check them.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

using Vec = Eigen::VectorXd;

// min <c, s> over {||s||_1 <= lam} and {<n, s> <= rhs} by enumerating every
// ball vertex and every intersection of the hyperplane with a segment between
// two ball vertices. Returns +inf when nothing is feasible.
inline double l1_cut_enumeration(const Vec& c, const Vec& n, double rhs, double lam) {
  const Eigen::Index d = c.size();
  std::vector<Vec> verts;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (double sgn : {1.0, -1.0}) {
      Vec v = Vec::Zero(d);
      v(i) = sgn * lam;
      verts.push_back(v);
    }
  }
  constexpr double kSlack = 1e-12;
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec& s) {
    if (n.dot(s) <= rhs + kSlack * (1.0 + std::abs(rhs)) && s.lpNorm<1>() <= lam * (1 + 1e-12)) {
      best = std::min(best, c.dot(s));
    }
  };
  for (const Vec& v : verts) consider(v);
  for (std::size_t a = 0; a < verts.size(); ++a) {
    for (std::size_t b = a + 1; b < verts.size(); ++b) {
      const double ha = n.dot(verts[a]) - rhs;
      const double hb = n.dot(verts[b]) - rhs;
      if ((ha < 0) == (hb < 0) || ha == hb) continue;
      const double w = ha / (ha - hb);
      consider((1 - w) * verts[a] + w * verts[b]);
    }
  }
  return best;
}

// Optimal value of min <c, S> over a product of unit balls (blocks of size
// `block`) cut by {<n, S> <= rhs}, by maximizing the concave dual
//   phi(l) = -sum_b ||c_b + l n_b|| - l rhs
// over a log-spaced grid on [0, 1e4] followed by golden-section refinement.
inline double ball_cut_dual_grid(const Vec& c, const Vec& n, double rhs, Eigen::Index block) {
  const Eigen::Index nb = c.size() / block;
  auto phi = [&](double l) {
    double acc = -l * rhs;
    for (Eigen::Index b = 0; b < nb; ++b) {
      acc -= (c.segment(b * block, block) + l * n.segment(b * block, block)).norm();
    }
    return acc;
  };
  std::vector<double> grid{0.0};
  for (int k = 0; k <= 4000; ++k) grid.push_back(std::pow(10.0, -8.0 + 12.0 * k / 4000.0));
  std::size_t arg = 0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (phi(grid[k]) > phi(grid[arg])) arg = k;
  }
  double lo = grid[arg == 0 ? 0 : arg - 1];
  double hi = grid[std::min(arg + 1, grid.size() - 1)];
  const double r = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200; ++it) {
    const double m1 = hi - r * (hi - lo);
    const double m2 = lo + r * (hi - lo);
    if (phi(m1) < phi(m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return std::max(phi(0.5 * (lo + hi)), phi(grid[arg]));
}

// s_t as the literal double sum.
inline double support_seq_direct(long t, double omega) {
  auto rho = [&](long k) { return std::pow(static_cast<double>(k + 1), -omega); };
  double s = 0.0;
  for (long tau = 2; tau <= t; ++tau) {
    double prod = rho(tau);
    for (long k = tau; k <= t; ++k) prod *= 1.0 - rho(k);
    s += prod * prod;
  }
  return s;
}

template <typename F>
Vec central_difference(F&& f, const Vec& x, double h = 1e-6) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2 * h);
  }
  return g;
}

// Least-squares fit slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace oracles
