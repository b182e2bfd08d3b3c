#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "sbcg/cut.hpp"
#include "sbcg/feasible_set.hpp"
#include "sbcg/lp.hpp"

namespace sbcg {

namespace detail {

inline double infeasibility_tol(const CutPlane& plane) {
  return 1e-12 * (1.0 + std::abs(plane.offset) + std::abs(plane.normal.dot(plane.anchor)));
}

// Throws InfeasibleCut when even the most favourable point of the set,
// lmo(set, normal), violates the cut.
inline void check_cut_feasible(const FeasibleSet& set, const CutPlane& plane) {
  const Vector best = lmo(set, plane.normal);
  const double v = plane.violation(best);
  if (v > infeasibility_tol(plane)) {
    throw InfeasibleCut("cutting plane excludes the feasible set (violation " + std::to_string(v) +
                        ")");
  }
}

inline void check_plane(const CutPlane& plane, Index dim) {
  if (plane.normal.size() != dim || plane.anchor.size() != dim) {
    throw InvalidArgument("cut plane dimension does not match the set");
  }
  if (!plane.normal.allFinite() || !plane.anchor.allFinite() || !std::isfinite(plane.offset)) {
    throw InvalidArgument("cut plane is not finite");
  }
}

}  // namespace detail

/// min <c, s> s.t. ||s||_1 <= radius and the cut. The same LP as the split
/// form, solved in the plane: vertex +-r e_i maps to (<a, v>, <c, v>) and the
/// optimum is the lower convex hull of those 2d points at the cut offset.
inline Vector constrained_lmo_l1(const Vector& c, const CutPlane& plane, double radius) {
  const Index d = c.size();
  require(radius > 0, "l1 radius must be positive");
  detail::check_plane(plane, d);
  if (!c.allFinite()) throw InvalidArgument("lmo direction is not finite");
  detail::check_cut_feasible(FeasibleSet(L1Ball{radius, d}), plane);

  const double beta = plane.offset + plane.normal.dot(plane.anchor);
  struct Pt {
    double x, y;
    Index k;  // coordinate i with sign + for k = 2i, - for k = 2i + 1
  };
  std::vector<Pt> pts;
  pts.reserve(static_cast<std::size_t>(2 * d));
  for (Index i = 0; i < d; ++i) {
    const double x = radius * plane.normal(i), y = radius * c(i);
    pts.push_back({x, y, 2 * i});
    pts.push_back({-x, -y, 2 * i + 1});
  }
  auto vertex = [&](Index k, double w, Vector& s) {
    s(k / 2) += (k % 2 == 0 ? radius : -radius) * w;
  };

  Vector s = Vector::Zero(d);
  const Pt best = *std::min_element(pts.begin(), pts.end(), [](const Pt& p, const Pt& q) {
    return p.y < q.y || (p.y == q.y && p.x < q.x);
  });
  if (best.x <= beta) {
    vertex(best.k, 1.0, s);
    return s;
  }

  std::sort(pts.begin(), pts.end(), [](const Pt& p, const Pt& q) { return p.x < q.x || (p.x == q.x && p.y < q.y); });
  std::vector<Pt> hull;
  for (const Pt& q : pts) {
    while (hull.size() >= 2) {
      const Pt& o = hull[hull.size() - 2];
      const Pt& a = hull.back();
      if ((a.x - o.x) * (q.y - o.y) - (a.y - o.y) * (q.x - o.x) > 0) break;
      hull.pop_back();
    }
    hull.push_back(q);
  }
  if (beta <= hull.front().x) {  // within the feasibility tolerance
    vertex(hull.front().k, 1.0, s);
    return s;
  }
  for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
    const Pt& l = hull[e];
    const Pt& r = hull[e + 1];
    if (r.x < beta) continue;
    const double w = (r.x - beta) / (r.x - l.x);  // r.x > l.x since l.x < beta <= r.x
    vertex(l.k, w, s);
    vertex(r.k, 1.0 - w, s);
    return s;
  }
  vertex(hull.back().k, 1.0, s);  // unreachable: best lies on the hull right of beta
  return s;
}

/// min <c, s> s.t. ||s||_1 <= radius and the cut, through the split s = s+ - s-
/// and the dense simplex solver. Reference path for constrained_lmo_l1.
inline Vector constrained_lmo_l1_simplex(const Vector& c, const CutPlane& plane, double radius) {
  const Index d = c.size();
  require(radius > 0, "l1 radius must be positive");
  detail::check_plane(plane, d);
  if (!c.allFinite()) throw InvalidArgument("lmo direction is not finite");
  const FeasibleSet ball(L1Ball{radius, d});
  detail::check_cut_feasible(ball, plane);

  LinearProgram lp;
  lp.cost.resize(2 * d);
  lp.cost << c, -c;
  lp.rows.resize(2, 2 * d);
  lp.rows.row(0).setOnes();
  lp.rows.row(1) << plane.normal.transpose(), -plane.normal.transpose();
  lp.rhs.resize(2);
  lp.rhs << radius, plane.offset + plane.normal.dot(plane.anchor);
  lp.sense = {RowSense::kLessEqual, RowSense::kLessEqual};

  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible) {
    throw InfeasibleCut("cutting plane excludes the l1 ball");
  }
  if (sol.status != LpStatus::kOptimal) throw Error("simplex solver did not reach an optimum");
  return sol.x.head(d) - sol.x.tail(d);
}

/// Contiguous Euclidean unit ball inside a longer vector.
struct BallSegment {
  Index offset = 0;
  Index dim = 0;
};

struct BallCutResult {
  Vector s;             // only the listed segments are written
  double lambda = 0.0;  // multiplier of the cut
  double residual = 0.0;
};

/// Solves min <c, s> over a product of unit balls intersected with the cut
/// through the one-dimensional dual: S(lambda)_b = -(c_b + lambda n_b)/||.||,
/// with the residual h(lambda) = <n, S(lambda) - anchor> - offset bisected to
/// |h| <= 1e-10. Coordinates outside `segments` must carry zero normal.
inline BallCutResult solve_ball_cut(const Vector& c, const CutPlane& plane,
                                    std::span<const BallSegment> segments) {
  // Per-block scalars make h(lambda) O(#blocks) to evaluate.
  struct BlockDots {
    double cc, cn, nn;
  };
  std::vector<BlockDots> dots;
  dots.reserve(segments.size());
  double anchor_term = 0.0;
  for (const BallSegment& seg : segments) {
    const auto cb = c.segment(seg.offset, seg.dim);
    const auto nb = plane.normal.segment(seg.offset, seg.dim);
    dots.push_back({cb.squaredNorm(), cb.dot(nb), nb.squaredNorm()});
    anchor_term += nb.dot(plane.anchor.segment(seg.offset, seg.dim));
  }
  auto residual = [&](double lambda) {
    double acc = 0.0;
    for (const BlockDots& b : dots) {
      const double sq = b.cc + 2.0 * lambda * b.cn + lambda * lambda * b.nn;
      if (sq > 0) acc -= (b.cn + lambda * b.nn) / std::sqrt(sq);
    }
    return acc - anchor_term - plane.offset;
  };
  auto candidate = [&](double lambda) {
    Vector s = Vector::Zero(c.size());
    for (const BallSegment& seg : segments) {
      const Vector dir = c.segment(seg.offset, seg.dim) + lambda * plane.normal.segment(seg.offset, seg.dim);
      const double nrm = dir.norm();
      if (nrm > 0) s.segment(seg.offset, seg.dim) = -dir / nrm;
    }
    return s;
  };

  // lambda -> infinity limit is lmo(normal).
  double h_far = -anchor_term - plane.offset;
  for (const BlockDots& b : dots) h_far -= std::sqrt(b.nn);
  if (h_far > detail::infeasibility_tol(plane)) {
    throw InfeasibleCut("cutting plane excludes the ball product (violation " +
                        std::to_string(h_far) + ")");
  }

  constexpr double kRootTol = 1e-10;
  const double h0 = residual(0.0);
  if (h0 <= 0) return {candidate(0.0), 0.0, h0};

  double lo = 0.0;
  double hi = 1.0;
  double h_hi = residual(hi);
  while (h_hi > kRootTol) {
    lo = hi;
    hi *= 2.0;
    if (hi > 0x1p60) throw BracketFailure("no sign change of the cut residual up to 2^60");
    h_hi = residual(hi);
  }
  if (h_hi >= -kRootTol) return {candidate(hi), hi, h_hi};

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double h_mid = residual(mid);
    if (std::abs(h_mid) <= kRootTol) return {candidate(mid), mid, h_mid};
    if (h_mid > 0) {
      lo = mid;
    } else {
      hi = mid;
      h_hi = h_mid;
    }
  }
  return {candidate(hi), hi, h_hi};
}

inline Vector constrained_lmo_ball_product(const Vector& c, const CutPlane& plane,
                                           const BallProductBlock& balls) {
  const Index dim = balls.num_blocks * balls.block_dim;
  if (c.size() != dim) throw InvalidArgument("direction dimension does not match the ball product");
  detail::check_plane(plane, dim);
  if (!c.allFinite()) throw InvalidArgument("lmo direction is not finite");
  std::vector<BallSegment> segs;
  segs.reserve(static_cast<std::size_t>(balls.num_blocks));
  for (Index b = 0; b < balls.num_blocks; ++b) segs.push_back({b * balls.block_dim, balls.block_dim});
  return solve_ball_cut(c, plane, segs).s;
}

namespace detail {

inline Vector constrained_lmo_polytope(const PolytopeByVertices& poly, const Vector& c,
                                       const CutPlane& plane) {
  const Index k = static_cast<Index>(poly.vertices.size());
  LinearProgram lp;
  lp.cost.resize(k);
  lp.rows.resize(2, k);
  for (Index i = 0; i < k; ++i) {
    const Vector& v = poly.vertices[static_cast<std::size_t>(i)];
    lp.cost(i) = c.dot(v);
    lp.rows(0, i) = 1.0;
    lp.rows(1, i) = plane.normal.dot(v - plane.anchor);
  }
  lp.rhs.resize(2);
  lp.rhs << 1.0, plane.offset;
  lp.sense = {RowSense::kEqual, RowSense::kLessEqual};
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible) throw InfeasibleCut("cutting plane excludes the polytope");
  if (sol.status != LpStatus::kOptimal) throw Error("simplex solver did not reach an optimum");
  Vector out = Vector::Zero(c.size());
  for (Index i = 0; i < k; ++i) out += sol.x(i) * poly.vertices[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace detail

/// argmin of <c, s> over Z intersected with the cut.
///
/// For block products, blocks on which the cut normal vanishes decouple and
/// use the plain lmo; the coupled blocks must be all ball blocks or a single
/// block of any kind.
inline Vector constrained_lmo(const FeasibleSet& set, const Vector& c, const CutPlane& plane) {
  detail::check_dim(set, c);
  detail::check_plane(plane, set.dimension());
  if (!c.allFinite()) throw InvalidArgument("lmo direction is not finite");
  detail::check_cut_feasible(set, plane);
  return std::visit(
      [&](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, L1Ball>) {
          return constrained_lmo_l1(c, plane, s.radius);
        } else if constexpr (std::is_same_v<T, BallProductBlock>) {
          return constrained_lmo_ball_product(c, plane, s);
        } else if constexpr (std::is_same_v<T, PolytopeByVertices>) {
          return detail::constrained_lmo_polytope(s, c, plane);
        } else {
          Vector out(c.size());
          std::vector<std::pair<const FeasibleSet*, Index>> coupled;
          detail::for_each_block(s, [&](const FeasibleSet& b, Index off) {
            const Index n = b.dimension();
            if (plane.normal.segment(off, n).isZero(0.0)) {
              out.segment(off, n) = lmo(b, c.segment(off, n));
            } else {
              coupled.emplace_back(&b, off);
            }
          });
          if (coupled.empty()) return out;

          // Offset seen by the coupled blocks: decoupled blocks contribute nothing.
          if (coupled.size() == 1) {
            const auto [b, off] = coupled.front();
            const Index n = b->dimension();
            const CutPlane sub{plane.normal.segment(off, n), plane.anchor.segment(off, n), plane.offset};
            out.segment(off, n) = constrained_lmo(*b, c.segment(off, n), sub);
            return out;
          }
          std::vector<BallSegment> segs;
          for (const auto& [b, off] : coupled) {
            const auto* balls = std::get_if<BallProductBlock>(&b->variant());
            if (balls == nullptr) {
              throw Unsupported("cut coupling non-ball blocks of a block product is not supported");
            }
            for (Index k = 0; k < balls->num_blocks; ++k) {
              segs.push_back({off + k * balls->block_dim, balls->block_dim});
            }
          }
          const BallCutResult r = solve_ball_cut(c, plane, segs);
          for (const BallSegment& seg : segs) out.segment(seg.offset, seg.dim) = r.s.segment(seg.offset, seg.dim);
          return out;
        }
      },
      set.variant());
}

}  // namespace sbcg
