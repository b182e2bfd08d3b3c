#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <variant>
#include <vector>

#include "sbcg/types.hpp"

namespace sbcg {

struct L1Ball {
  double radius = 1.0;
  Index dim = 0;
};

// num_blocks contiguous Euclidean unit balls of dimension block_dim each.
struct BallProductBlock {
  Index num_blocks = 0;
  Index block_dim = 0;
};

// Convex hull of a finite point list. Used as a brute-force test oracle.
struct PolytopeByVertices {
  std::vector<Vector> vertices;
};

class FeasibleSet;

struct BlockProduct {
  std::vector<FeasibleSet> blocks;
};

/// Compact convex set Z accessed through linear minimization and projection.
class FeasibleSet {
 public:
  using Variant = std::variant<L1Ball, BallProductBlock, BlockProduct, PolytopeByVertices>;

  FeasibleSet(L1Ball s) : v_(s) {
    require(s.radius > 0 && std::isfinite(s.radius), "L1Ball radius must be positive");
    require(s.dim > 0, "L1Ball dimension must be positive");
  }
  FeasibleSet(BallProductBlock s) : v_(s) {
    require(s.num_blocks > 0 && s.block_dim > 0, "BallProductBlock needs positive sizes");
  }
  FeasibleSet(BlockProduct s) : v_(std::move(s)) {
    require(!std::get<BlockProduct>(v_).blocks.empty(), "BlockProduct needs at least one block");
  }
  FeasibleSet(PolytopeByVertices s) : v_(std::move(s)) {
    const auto& vs = std::get<PolytopeByVertices>(v_).vertices;
    require(!vs.empty(), "polytope needs at least one vertex");
    for (const Vector& v : vs) {
      require(v.size() == vs.front().size(), "polytope vertices differ in dimension");
      require(v.allFinite(), "polytope vertex is not finite");
    }
  }

  const Variant& variant() const { return v_; }

  Index dimension() const {
    return std::visit(
        [](const auto& s) -> Index {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, L1Ball>) {
            return s.dim;
          } else if constexpr (std::is_same_v<T, BallProductBlock>) {
            return s.num_blocks * s.block_dim;
          } else if constexpr (std::is_same_v<T, BlockProduct>) {
            Index n = 0;
            for (const auto& b : s.blocks) n += b.dimension();
            return n;
          } else {
            return s.vertices.front().size();
          }
        },
        v_);
  }

  double diameter() const {
    return std::visit(
        [](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, L1Ball>) {
            return 2.0 * s.radius;
          } else if constexpr (std::is_same_v<T, BallProductBlock>) {
            return 2.0 * std::sqrt(static_cast<double>(s.num_blocks));
          } else if constexpr (std::is_same_v<T, BlockProduct>) {
            double sq = 0.0;
            for (const auto& b : s.blocks) sq += b.diameter() * b.diameter();
            return std::sqrt(sq);
          } else {
            double best = 0.0;
            for (const auto& a : s.vertices) {
              for (const auto& b : s.vertices) best = std::max(best, (a - b).norm());
            }
            return best;
          }
        },
        v_);
  }

  bool contains(const Vector& x, double tol) const;

 private:
  Variant v_;
};

namespace detail {

// Calls fn(block, offset) for every block of a BlockProduct.
template <typename Fn>
void for_each_block(const BlockProduct& p, Fn&& fn) {
  Index offset = 0;
  for (const FeasibleSet& b : p.blocks) {
    fn(b, offset);
    offset += b.dimension();
  }
}

inline void check_dim(const FeasibleSet& set, const Vector& v) {
  if (v.size() != set.dimension()) throw InvalidArgument("vector dimension does not match the set");
}

}  // namespace detail

/// argmin_{s in set} <c, s>.
///
/// L1 ball: the signed vertex on the lowest index of max |c_i| (zero c gives
/// the center). Ball blocks: -c_b/||c_b||, center for a zero block.
inline Vector lmo(const FeasibleSet& set, const Vector& c) {
  detail::check_dim(set, c);
  if (!c.allFinite()) throw InvalidArgument("lmo direction is not finite");
  return std::visit(
      [&](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, L1Ball>) {
          Vector out = Vector::Zero(s.dim);
          Index best = 0;
          double best_abs = -1.0;
          for (Index i = 0; i < s.dim; ++i) {
            if (std::abs(c(i)) > best_abs) {
              best_abs = std::abs(c(i));
              best = i;
            }
          }
          if (c(best) > 0) {
            out(best) = -s.radius;
          } else if (c(best) < 0) {
            out(best) = s.radius;
          }
          return out;
        } else if constexpr (std::is_same_v<T, BallProductBlock>) {
          Vector out = Vector::Zero(c.size());
          for (Index b = 0; b < s.num_blocks; ++b) {
            const auto cb = c.segment(b * s.block_dim, s.block_dim);
            const double nrm = cb.norm();
            if (nrm > 0) out.segment(b * s.block_dim, s.block_dim) = -cb / nrm;
          }
          return out;
        } else if constexpr (std::is_same_v<T, BlockProduct>) {
          Vector out(c.size());
          detail::for_each_block(s, [&](const FeasibleSet& b, Index off) {
            out.segment(off, b.dimension()) = lmo(b, c.segment(off, b.dimension()));
          });
          return out;
        } else {
          Index best = 0;
          double best_val = c.dot(s.vertices[0]);
          for (std::size_t i = 1; i < s.vertices.size(); ++i) {
            const double v = c.dot(s.vertices[i]);
            if (v < best_val) {
              best_val = v;
              best = static_cast<Index>(i);
            }
          }
          return s.vertices[static_cast<std::size_t>(best)];
        }
      },
      set.variant());
}

/// Euclidean projection of v onto {x : ||x||_1 <= radius} by sorting.
inline Vector project_l1_ball(const Vector& v, double radius) {
  if (v.lpNorm<1>() <= radius) return v;
  Vector u = v.cwiseAbs();
  std::sort(u.data(), u.data() + u.size(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (Index j = 0; j < u.size(); ++j) {
    cumsum += u(j);
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (u(j) - t > 0) theta = t;
  }
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double mag = std::max(std::abs(v(i)) - theta, 0.0);
    out(i) = v(i) >= 0 ? mag : -mag;
  }
  return out;
}

inline Vector project(const FeasibleSet& set, const Vector& x) {
  detail::check_dim(set, x);
  if (!x.allFinite()) throw InvalidArgument("cannot project a non-finite point");
  return std::visit(
      [&](const auto& s) -> Vector {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, L1Ball>) {
          return project_l1_ball(x, s.radius);
        } else if constexpr (std::is_same_v<T, BallProductBlock>) {
          Vector out = x;
          for (Index b = 0; b < s.num_blocks; ++b) {
            auto seg = out.segment(b * s.block_dim, s.block_dim);
            const double nrm = seg.norm();
            if (nrm > 1.0) seg /= nrm;
          }
          return out;
        } else if constexpr (std::is_same_v<T, BlockProduct>) {
          Vector out(x.size());
          detail::for_each_block(s, [&](const FeasibleSet& b, Index off) {
            out.segment(off, b.dimension()) = project(b, x.segment(off, b.dimension()));
          });
          return out;
        } else {
          throw Unsupported("projection onto a vertex-described polytope is not implemented");
        }
      },
      set.variant());
}

inline bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (x.size() != dimension()) return false;
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, L1Ball>) {
          return x.lpNorm<1>() <= s.radius + tol;
        } else if constexpr (std::is_same_v<T, BallProductBlock>) {
          for (Index b = 0; b < s.num_blocks; ++b) {
            if (x.segment(b * s.block_dim, s.block_dim).norm() > 1.0 + tol) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, BlockProduct>) {
          bool ok = true;
          detail::for_each_block(s, [&](const FeasibleSet& b, Index off) {
            ok = ok && b.contains(x.segment(off, b.dimension()), tol);
          });
          return ok;
        } else {
          throw Unsupported("membership test for a vertex-described polytope is not implemented");
        }
      },
      v_);
}

}  // namespace sbcg
