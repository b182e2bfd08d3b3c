#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sbcg/constrained_lmo.hpp"

using namespace sbcg;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Vector random_l1_point(Rng& rng, Index d, double radius) {
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector w(d + 1);
  for (Index i = 0; i <= d; ++i) w(i) = e(rng);
  w /= w.sum();
  Vector x(d);
  for (Index i = 0; i < d; ++i) x(i) = (u(rng) < 0.5 ? -1 : 1) * radius * w(i);
  return x;
}

Vector random_ball_point(Rng& rng, Index d) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(d);
  for (Index i = 0; i < d; ++i) x(i) = n(rng);
  return x / x.norm() * std::pow(u(rng), 1.0 / static_cast<double>(d));
}

}  // namespace

TEST(Simplex, SolvesSmallLp) {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6  ->  (1.6, 1.2)
  LinearProgram lp;
  lp.cost = vec({-1, -1});
  lp.rows.resize(2, 2);
  lp.rows << 1, 2, 3, 1;
  lp.rhs = vec({4, 6});
  lp.sense = {RowSense::kLessEqual, RowSense::kLessEqual};
  const LpSolution s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.x(0), 1.6, 1e-12);
  EXPECT_NEAR(s.x(1), 1.2, 1e-12);
  EXPECT_NEAR(s.objective, -2.8, 1e-12);
}

TEST(Simplex, EqualityAndGreaterRows) {
  // min x + 2y + 3z s.t. x + y + z = 1, y >= 0.25
  LinearProgram lp;
  lp.cost = vec({1, 2, 3});
  lp.rows.resize(2, 3);
  lp.rows << 1, 1, 1, 0, 1, 0;
  lp.rhs = vec({1, 0.25});
  lp.sense = {RowSense::kEqual, RowSense::kGreaterEqual};
  const LpSolution s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.objective, 1.25, 1e-12);
}

TEST(Simplex, DetectsInfeasibleAndUnbounded) {
  LinearProgram bad;
  bad.cost = vec({1});
  bad.rows.resize(1, 1);
  bad.rows << 1;
  bad.rhs = vec({-1});
  bad.sense = {RowSense::kGreaterEqual};
  bad.rhs(0) = 1;
  bad.sense = {RowSense::kLessEqual};
  bad.rows(0, 0) = -1;  // -x <= 1 with cost x: optimum 0
  EXPECT_EQ(solve_lp(bad).status, LpStatus::kOptimal);

  LinearProgram inf;
  inf.cost = vec({1});
  inf.rows.resize(1, 1);
  inf.rows << 1;
  inf.rhs = vec({-1});
  inf.sense = {RowSense::kEqual};
  EXPECT_EQ(solve_lp(inf).status, LpStatus::kInfeasible);

  LinearProgram unb;
  unb.cost = vec({-1});
  unb.rows.resize(1, 1);
  unb.rows << -1;
  unb.rhs = vec({1});
  unb.sense = {RowSense::kLessEqual};
  EXPECT_EQ(solve_lp(unb).status, LpStatus::kUnbounded);
}

TEST(Simplex, RedundantEqualityRows) {
  LinearProgram lp;
  lp.cost = vec({1, 1});
  lp.rows.resize(2, 2);
  lp.rows << 1, 1, 2, 2;
  lp.rhs = vec({1, 2});
  lp.sense = {RowSense::kEqual, RowSense::kEqual};
  const LpSolution s = solve_lp(lp);
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.objective, 1.0, 1e-12);
}

TEST(FeasibleSetTest, Diameters) {
  EXPECT_DOUBLE_EQ(FeasibleSet(L1Ball{10, 4}).diameter(), 20.0);
  EXPECT_DOUBLE_EQ(FeasibleSet(BallProductBlock{1, 3}).diameter(), 2.0);
  FeasibleSet prod(BlockProduct{{FeasibleSet(L1Ball{1.5, 2}), FeasibleSet(BallProductBlock{1, 2})}});
  EXPECT_DOUBLE_EQ(prod.diameter(), std::sqrt(13.0));
  EXPECT_EQ(prod.dimension(), 4);
}

TEST(FeasibleSetTest, RejectsBadShapes) {
  EXPECT_THROW(FeasibleSet(L1Ball{0, 2}), InvalidArgument);
  EXPECT_THROW(FeasibleSet(BallProductBlock{0, 2}), InvalidArgument);
  EXPECT_THROW(FeasibleSet(PolytopeByVertices{{vec({1, 0}), vec({1})}}), InvalidArgument);
}

TEST(Lmo, L1Vertex) {
  const FeasibleSet ball(L1Ball{10, 3});
  const Vector s = lmo(ball, vec({3, -1, 0}));
  EXPECT_EQ(s, vec({-10, 0, 0}));
  // Ties go to the lowest index.
  EXPECT_EQ(lmo(ball, vec({0, -2, 2})), vec({0, 10, 0}));
  EXPECT_EQ(lmo(ball, vec({0, 0, 0})), vec({0, 0, 0}));
}

TEST(Lmo, ZeroBallBlockGivesCenter) {
  EXPECT_EQ(lmo(FeasibleSet(BallProductBlock{1, 2}), vec({0, 0})), vec({0, 0}));
  EXPECT_EQ(lmo(FeasibleSet(BallProductBlock{2, 2}), vec({3, 4, 0, 0})), vec({-0.6, -0.8, 0, 0}));
}

TEST(Lmo, PolytopeEnumeration) {
  const FeasibleSet tri(PolytopeByVertices{{vec({0, 0}), vec({1, 0}), vec({0, 1})}});
  EXPECT_EQ(lmo(tri, vec({-1, -2})), vec({0, 1}));
}

TEST(Lmo, RejectsNonFinite) {
  EXPECT_THROW(lmo(FeasibleSet(L1Ball{1, 2}), vec({NAN, 0})), InvalidArgument);
  EXPECT_THROW(lmo(FeasibleSet(L1Ball{1, 2}), vec({1, 0, 0})), InvalidArgument);
}

TEST(LmoProperty, BeatsRandomFeasiblePoints) {
  Rng rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  const FeasibleSet l1(L1Ball{2.5, 5});
  const FeasibleSet balls(BallProductBlock{3, 2});
  for (int trial = 0; trial < 1000; ++trial) {
    Vector c1(5), c2(6);
    for (Index i = 0; i < 5; ++i) c1(i) = n(rng);
    for (Index i = 0; i < 6; ++i) c2(i) = n(rng);
    const double v1 = c1.dot(lmo(l1, c1));
    const double v2 = c2.dot(lmo(balls, c2));
    const Vector p1 = random_l1_point(rng, 5, 2.5);
    Vector p2(6);
    for (Index b = 0; b < 3; ++b) p2.segment(2 * b, 2) = random_ball_point(rng, 2);
    EXPECT_LE(v1, c1.dot(p1) + 1e-12);
    EXPECT_LE(v2, c2.dot(p2) + 1e-12);
  }
}

TEST(Projection, Examples) {
  const FeasibleSet l1(L1Ball{1, 2});
  EXPECT_EQ(project(l1, vec({0.2, -0.3})), vec({0.2, -0.3}));
  EXPECT_TRUE(project(l1, vec({2, 0})).isApprox(vec({1, 0}), 1e-15));
  EXPECT_TRUE(project(l1, vec({1, 1})).isApprox(vec({0.5, 0.5}), 1e-15));
  EXPECT_TRUE(project(FeasibleSet(BallProductBlock{1, 2}), vec({3, 4})).isApprox(vec({0.6, 0.8}), 1e-15));
}

TEST(Projection, MatchesGridMinimization) {
  const FeasibleSet l1(L1Ball{1, 2});
  const Vector x = vec({1, 1});
  double best = 1e9;
  Vector arg(2);
  const int steps = 2000;
  for (int i = -steps; i <= steps; ++i) {
    for (int j = -steps; j <= steps; ++j) {
      const Vector s = vec({i / double(steps), j / double(steps)});
      if (s.lpNorm<1>() > 1 + 1e-12) continue;
      const double dist = (s - x).squaredNorm();
      if (dist < best) {
        best = dist;
        arg = s;
      }
    }
  }
  EXPECT_NEAR((project(l1, x) - arg).norm(), 0.0, 1e-3);
}

TEST(ProjectionProperty, IdempotentAndNonexpansive) {
  Rng rng(11);
  std::normal_distribution<double> n(0.0, 2.0);
  const FeasibleSet set(BlockProduct{{FeasibleSet(L1Ball{1.5, 4}), FeasibleSet(BallProductBlock{2, 3})}});
  for (int trial = 0; trial < 500; ++trial) {
    Vector a(10), b(10);
    for (Index i = 0; i < 10; ++i) {
      a(i) = n(rng);
      b(i) = n(rng);
    }
    const Vector pa = project(set, a);
    const Vector pb = project(set, b);
    EXPECT_TRUE(set.contains(pa, 1e-12));
    EXPECT_LE((project(set, pa) - pa).norm(), 1e-10);
    EXPECT_LE((pa - pb).norm(), (a - b).norm() + 1e-10);
  }
}

TEST(ConstrainedLmoL1, HalfspaceExample) {
  const CutPlane plane{vec({1, 0}), vec({0, 0}), 0.0};
  EXPECT_TRUE(constrained_lmo_l1(vec({0, 1}), plane, 1.0).isApprox(vec({0, -1}), 1e-12));
}

TEST(ConstrainedLmoL1, InactivePlaneMatchesLmo) {
  const Vector n = vec({0.3, -2, 1});
  const Vector a = vec({0.1, 0.2, -0.3});
  const double off = n.lpNorm<Eigen::Infinity>() * 2.0 + std::abs(n.dot(a)) + 1.0;
  const Vector c = vec({0.5, 4, -1});
  const Vector s = constrained_lmo_l1(c, CutPlane{n, a, off}, 2.0);
  EXPECT_NEAR(c.dot(s), c.dot(lmo(FeasibleSet(L1Ball{2, 3}), c)), 1e-12);
}

TEST(ConstrainedLmoL1, ExcludedSetThrows) {
  const CutPlane plane{vec({1, 0}), vec({0, 0}), -2.0};
  EXPECT_THROW(constrained_lmo_l1(vec({0, 1}), plane, 1.0), InfeasibleCut);
}

TEST(ConstrainedLmoL1, MatchesVertexEnumeration) {
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 6);
  int solved = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index d = dim(rng);
    const double lam = 0.5 + std::abs(n(rng));
    Vector c(d), nrm(d), anchor(d);
    for (Index i = 0; i < d; ++i) {
      c(i) = n(rng);
      nrm(i) = n(rng);
      anchor(i) = 0.3 * n(rng);
    }
    const double off = 0.5 * n(rng);
    const CutPlane plane{nrm, anchor, off};
    const double ref = oracles::l1_cut_enumeration(c, nrm, off + nrm.dot(anchor), lam);
    if (!std::isfinite(ref)) {
      EXPECT_THROW(constrained_lmo_l1(c, plane, lam), InfeasibleCut);
      continue;
    }
    const Vector s = constrained_lmo_l1(c, plane, lam);
    EXPECT_NEAR(c.dot(s), ref, 1e-9) << "trial " << trial;
    EXPECT_LE(s.lpNorm<1>(), lam + 1e-9);
    EXPECT_LE(plane.violation(s), 1e-9);
    ++solved;
  }
  EXPECT_GT(solved, 500);
}

TEST(ConstrainedLmoL1, AgreesWithSimplexPath) {
  Rng rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 60), small(-2, 2);
  for (int trial = 0; trial < 400; ++trial) {
    const Index d = dim(rng);
    const bool ties = trial % 2 == 1;  // integer data: repeated values and degenerate edges
    Vector c(d), nrm(d), anchor = Vector::Zero(d);
    for (Index i = 0; i < d; ++i) {
      c(i) = ties ? small(rng) : n(rng);
      nrm(i) = ties ? small(rng) : n(rng);
    }
    const double off = ties ? small(rng) : n(rng);
    const CutPlane plane{nrm, anchor, off};
    std::optional<Vector> lp;
    try {
      lp = constrained_lmo_l1_simplex(c, plane, 1.5);
    } catch (const InfeasibleCut&) {
      EXPECT_THROW(constrained_lmo_l1(c, plane, 1.5), InfeasibleCut) << trial;
      continue;
    }
    const Vector s = constrained_lmo_l1(c, plane, 1.5);
    EXPECT_NEAR(c.dot(s), c.dot(*lp), 1e-10) << "trial " << trial;
    EXPECT_LE(s.lpNorm<1>(), 1.5 + 1e-12);
    EXPECT_LE(plane.violation(s), 1e-10);
  }
}

TEST(ConstrainedLmoBall, InactivePlaneReducesToLmo) {
  const CutPlane plane{vec({0, 1}), vec({0, 0}), 10.0};
  EXPECT_TRUE(constrained_lmo_ball_product(vec({1, 0}), plane, BallProductBlock{1, 2})
                  .isApprox(vec({-1, 0}), 1e-15));
}

TEST(ConstrainedLmoBall, ActiveCutMatchesDualGrid) {
  const Vector c = vec({1, 0});
  const CutPlane plane{vec({0, 1}), vec({0, 0}), -0.5};
  const Vector s = constrained_lmo_ball_product(c, plane, BallProductBlock{1, 2});
  EXPECT_LE(s(1), -0.5 + 1e-8);
  EXPECT_LE(s.norm(), 1 + 1e-12);
  EXPECT_NEAR(c.dot(s), oracles::ball_cut_dual_grid(c, plane.normal, -0.5, 2), 1e-6);
  // Closed form for this instance: s = (-sqrt(3)/2, -1/2).
  EXPECT_NEAR(s(0), -std::sqrt(3.0) / 2, 1e-8);
}

TEST(ConstrainedLmoBall, ExcludedSetThrows) {
  const CutPlane plane{vec({0, 1}), vec({0, 0}), -1.5};
  EXPECT_THROW(constrained_lmo_ball_product(vec({1, 0}), plane, BallProductBlock{1, 2}), InfeasibleCut);
}

TEST(ConstrainedLmoBall, RandomInstancesMatchDualGrid) {
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Index blocks = 1 + trial % 3;
    const Index m = 2 + trial % 2;
    const Index d = blocks * m;
    Vector c(d), nrm(d), anchor(d);
    for (Index i = 0; i < d; ++i) {
      c(i) = n(rng);
      nrm(i) = n(rng);
    }
    for (Index b = 0; b < blocks; ++b) anchor.segment(b * m, m) = random_ball_point(rng, m);
    // Offset between the set's minimum of the cut form and its value at lmo(c).
    const Vector best = lmo(FeasibleSet(BallProductBlock{blocks, m}), nrm);
    const Vector free = lmo(FeasibleSet(BallProductBlock{blocks, m}), c);
    const double lo = nrm.dot(best - anchor);
    const double hi = nrm.dot(free - anchor);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    const double off = lo + u(rng) * (std::max(hi, lo + 1e-3) - lo);
    const CutPlane plane{nrm, anchor, off};
    const Vector s = constrained_lmo_ball_product(c, plane, BallProductBlock{blocks, m});
    EXPECT_LE(plane.violation(s), 1e-8);
    const double ref = oracles::ball_cut_dual_grid(c, nrm, off + nrm.dot(anchor), m);
    EXPECT_NEAR(c.dot(s), ref, 1e-6) << "trial " << trial;
  }
}

TEST(ConstrainedLmoBall, ResidualAtRootIsSmall) {
  const Vector c = vec({1, 2, -1, 0.5});
  const CutPlane plane{vec({0.5, 1, 1, 0}), vec({0, 0, 0, 0}), -1.0};
  const std::vector<BallSegment> segs{{0, 2}, {2, 2}};
  const BallCutResult r = solve_ball_cut(c, plane, segs);
  EXPECT_GT(r.lambda, 0.0);
  EXPECT_LE(std::abs(r.residual), 1e-8);
  EXPECT_NEAR(plane.violation(r.s), r.residual, 1e-12);
}

TEST(ConstrainedLmo, BlockProductSeparates) {
  const FeasibleSet set(BlockProduct{{FeasibleSet(BallProductBlock{2, 2}), FeasibleSet(L1Ball{3, 3})}});
  Vector nrm = Vector::Zero(7);
  nrm.head(4) << 1, 0.5, -1, 0.2;
  const CutPlane plane{nrm, Vector::Zero(7), -0.8};
  const Vector c = vec({1, -1, 0.5, 2, 0.3, -4, 1});
  const Vector s = constrained_lmo(set, c, plane);
  EXPECT_EQ(s.tail(3), lmo(FeasibleSet(L1Ball{3, 3}), c.tail(3)));
  const Vector head = constrained_lmo_ball_product(c.head(4), CutPlane{nrm.head(4), Vector::Zero(4), -0.8},
                                                   BallProductBlock{2, 2});
  EXPECT_TRUE(s.head(4).isApprox(head, 1e-14));
  EXPECT_LE(plane.violation(s), 1e-8);
}

TEST(ConstrainedLmo, HugeOffsetEqualsLmo) {
  const FeasibleSet set(L1Ball{1, 4});
  const Vector c = vec({0.1, -3, 2, 0});
  const CutPlane plane{vec({1, 1, 1, 1}), vec({0, 0, 0, 0}), 1e6};
  EXPECT_NEAR(c.dot(constrained_lmo(set, c, plane)), c.dot(lmo(set, c)), 1e-12);
}

TEST(ConstrainedLmo, PolytopeMatchesL1) {
  Rng rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 3;
    std::vector<Vector> verts;
    for (Index i = 0; i < d; ++i) {
      for (double sg : {1.0, -1.0}) {
        Vector v = Vector::Zero(d);
        v(i) = sg * 1.5;
        verts.push_back(v);
      }
    }
    Vector c(d), nrm(d);
    for (Index i = 0; i < d; ++i) {
      c(i) = n(rng);
      nrm(i) = n(rng);
    }
    const CutPlane plane{nrm, Vector::Zero(d), 0.2 * n(rng)};
    const FeasibleSet poly(PolytopeByVertices{verts});
    try {
      const Vector a = constrained_lmo(poly, c, plane);
      const Vector b = constrained_lmo(FeasibleSet(L1Ball{1.5, d}), c, plane);
      EXPECT_NEAR(c.dot(a), c.dot(b), 1e-9);
    } catch (const InfeasibleCut&) {
      EXPECT_THROW(constrained_lmo(FeasibleSet(L1Ball{1.5, d}), c, plane), InfeasibleCut);
    }
  }
}

TEST(ConstrainedLmoProperty, BeatsRandomCutFeasiblePoints) {
  Rng rng(21);
  std::normal_distribution<double> n(0.0, 1.0);
  const FeasibleSet set(BlockProduct{{FeasibleSet(L1Ball{2, 3}), FeasibleSet(BallProductBlock{1, 2})}});
  int checked = 0;
  for (int inst = 0; inst < 20; ++inst) {
    Vector c(5), nrm(5);
    for (Index i = 0; i < 5; ++i) c(i) = n(rng);
    for (Index i = 0; i < 3; ++i) nrm(i) = n(rng);
    nrm.tail(2).setZero();
    const CutPlane plane{nrm, Vector::Zero(5), 0.3 * std::abs(n(rng))};
    const Vector s = constrained_lmo(set, c, plane);
    const double v = c.dot(s);
    for (int k = 0; k < 500; ++k) {
      Vector p(5);
      p.head(3) = random_l1_point(rng, 3, 2);
      p.tail(2) = random_ball_point(rng, 2);
      if (plane.violation(p) > 0) continue;
      EXPECT_LE(v, c.dot(p) + 1e-8);
      ++checked;
    }
  }
  EXPECT_GT(checked, 2000);
}
