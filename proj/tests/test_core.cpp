#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sbcg/constrained_lmo.hpp"
#include "sbcg/estimators.hpp"
#include "sbcg/problem.hpp"

using namespace sbcg;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ProblemConstants unit_constants() {
  ProblemConstants k;
  k.L_l = k.L_g = k.L_f = 1.0;
  k.D = 1.0;
  return k;
}

// Random convex quadratic g(z) = 0.5 (z - m)' H (z - m) + g0.
struct Quadratic {
  Matrix H;
  Vector m;
  double g0 = 0.0;
  double value(const Vector& z) const { return 0.5 * (z - m).dot(H * (z - m)) + g0; }
  Vector grad(const Vector& z) const { return H * (z - m); }
};

Quadratic random_quadratic(Rng& rng, Index d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix B(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) B(i, j) = n(rng);
  Quadratic q;
  q.H = B * B.transpose() / static_cast<double>(d);
  q.m = Vector(d);
  for (Index i = 0; i < d; ++i) q.m(i) = n(rng);
  q.g0 = n(rng);
  return q;
}

}  // namespace

TEST(CutPlaneTest, OffsetFormula) {
  const CutPlane p = make_cut_plane(vec({1, 0}), 2.0, 2.0, 0.0, vec({0, 0}));
  EXPECT_EQ(p.offset, 0.0);
  EXPECT_TRUE(cut_contains(p, vec({-1, 5}), 0.0));
  EXPECT_TRUE(cut_contains(p, vec({1e-13, 0}), 1e-9));
  EXPECT_FALSE(cut_contains(p, vec({0.1, 0}), 0.0));
  const CutPlane q = make_cut_plane(vec({1, 2}), 0.5, 3.0, 0.25, vec({1, 1}));
  EXPECT_DOUBLE_EQ(q.offset, 2.75);
  EXPECT_EQ(q.anchor, vec({1, 1}));
}

TEST(CutPlaneTest, LargeSlackContainsEverything) {
  const CutPlane p = make_cut_plane(vec({3, -4}), 1.0, 0.0, 1e9, vec({0.2, 0.1}));
  const FeasibleSet ball(L1Ball{5, 2});
  EXPECT_TRUE(cut_contains(p, lmo(ball, -p.normal), 0.0));
}

TEST(CutPlaneTest, RejectsBadInputs) {
  EXPECT_THROW(make_cut_plane(vec({NAN, 0}), 0, 0, 0, vec({0, 0})), InvalidArgument);
  EXPECT_THROW(make_cut_plane(vec({1, 0}), INFINITY, 0, 0, vec({0, 0})), InvalidArgument);
  EXPECT_THROW(make_cut_plane(vec({1, 0}), 0, 0, -1, vec({0, 0})), InvalidArgument);
  EXPECT_THROW(make_cut_plane(vec({1, 0}), 0, 0, 0, vec({0, 0, 0})), InvalidArgument);
  const CutPlane p{vec({1, 0}), vec({0, 0}), 0};
  EXPECT_THROW(cut_contains(p, vec({0}), 0), InvalidArgument);
  EXPECT_THROW(cut_contains(p, vec({0, 0}), -1), InvalidArgument);
}

TEST(CutPlaneProperty, ExactDataContainsSublevelSet) {
  Rng rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index d = 2 + trial % 4;
    const Quadratic q = random_quadratic(rng, d);
    Vector x0(d), xt(d);
    for (Index i = 0; i < d; ++i) {
      x0(i) = q.m(i) + n(rng);
      xt(i) = q.m(i) + n(rng);
    }
    const CutPlane p = make_cut_plane(q.grad(xt), q.value(xt), q.value(x0), u(rng), xt);
    // Points on segments between the minimizer and x0 have g <= g(x0).
    for (int k = 0; k < 10; ++k) {
      const Vector z = q.m + u(rng) * (x0 - q.m);
      ASSERT_LE(q.value(z), q.value(x0) + 1e-12);
      EXPECT_TRUE(cut_contains(p, z, 1e-10));
    }
  }
}

TEST(CutPlaneProperty, NoisyDataWithoutSlackCanExcludeMinimizer) {
  Rng rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Quadratic q = random_quadratic(rng, 3);
    const Vector xt = q.m + 0.1 * Vector::Random(3);
    Vector noisy_grad = q.grad(xt);
    for (Index i = 0; i < 3; ++i) noisy_grad(i) += n(rng);
    const double noisy_value = q.value(xt) + n(rng);
    const CutPlane p = make_cut_plane(noisy_grad, noisy_value, q.value(q.m), 0.0, xt);
    if (!cut_contains(p, q.m, 0.0)) ++violations;
  }
  EXPECT_GE(violations, 1);
}

TEST(KtSchedule, ConvexExample) {
  const ProblemConstants k = unit_constants();
  // (2 sqrt(2 ln 300) + 2 sqrt(2 ln 600)) / sqrt(6)
  const double hand = (2 * std::sqrt(2 * std::log(300.0)) + 2 * std::sqrt(2 * std::log(600.0))) / std::sqrt(6.0);
  EXPECT_NEAR(kt_sbcgi(k, 5, 0.1, 2, 1.0, 0, 1.0), hand, 1e-12);
  EXPECT_NEAR(hand, 5.68, 5e-3);
  EXPECT_EQ(kt_sbcgi(k, 5, 0.1, 2, 1.0, 0, 0.0), 0.0);
  EXPECT_LT(kt_sbcgi(k, 1000000000000L, 0.1, 2, 1.0, 0, 1.0), 1e-4);
}

TEST(KtSchedule, NonconvexUsesHorizonAndCubeRoot) {
  ProblemConstants k = unit_constants();
  k.sigma_l = 0.5;
  k.sigma_g = 0.25;
  const double w = std::pow(3.0, 2.0 / 3.0) / (std::pow(3.0, 2.0 / 3.0) - 1.0);
  const double T = 1000, t = 7, d = 3, delta = 0.05;
  const double hand = ((2 + w * 0.5) * std::sqrt(2 * std::log(6 * T / delta)) +
                       (2 + w * 0.25) * std::sqrt(2 * std::log(6 * T * d / delta))) *
                      std::pow(t + 1, -1.0 / 3.0);
  EXPECT_NEAR(kt_sbcgi(k, 7, delta, 3, 2.0 / 3.0, 1000, 1.0), hand, 1e-12);
  EXPECT_THROW(kt_sbcgi(k, 7, delta, 3, 0.5, 1000, 1.0), InvalidArgument);
}

TEST(KtSchedule, ConvexIsNonincreasing) {
  ProblemConstants k = unit_constants();
  k.sigma_g = k.sigma_l = 1.0;
  double prev = INFINITY;
  for (long t = 0; t < 5000; ++t) {
    const double v = kt_sbcgi(k, t, 0.1, 10, 1.0, 0, 1.0);
    EXPECT_LE(v, prev);
    prev = v;
  }
  prev = INFINITY;
  for (long t = 0; t < 5000; ++t) {
    const double v = kt_sbcgi(k, t, 0.1, 10, 2.0 / 3.0, 5000, 1.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(KtSchedule, FiniteSumExample) {
  const ProblemConstants k = unit_constants();
  const double gamma = std::log(100.0) / 100.0;
  const double hand = 4 * 2 * std::sqrt(std::log(12000.0)) * gamma;
  EXPECT_NEAR(kt_sbcgf(k, gamma, 0.1, 100), hand, 1e-12);
  EXPECT_NEAR(hand, 1.13, 5e-3);
  EXPECT_EQ(kt_sbcgf(k, 0.0, 0.1, 100), 0.0);
  EXPECT_NEAR(kt_sbcgf(k, 0.2, 0.1, 100), 2 * kt_sbcgf(k, 0.1, 0.1, 100), 1e-14);
  ProblemConstants big = k;
  big.L_l = 1e-6;
  big.D = 2.0;
  ProblemConstants small = k;
  small.L_l = 1e-6;
  EXPECT_NEAR(kt_sbcgf(big, 0.1, 0.1, 100) / kt_sbcgf(small, 0.1, 0.1, 100), 4.0, 1e-4);
}

TEST(FwGap, Examples) {
  const SolutionSetLmo origin = [](const Vector& c) { return Vector::Zero(c.size()); };
  EXPECT_DOUBLE_EQ(fw_gap_exact(vec({1, 2}), vec({1, 1}), origin), 3.0);
  const FeasibleSet seg(PolytopeByVertices{{vec({0, 0}), vec({1, 0})}});
  const SolutionSetLmo seg_lmo = [&](const Vector& c) { return lmo(seg, c); };
  EXPECT_DOUBLE_EQ(fw_gap_exact(vec({0, 0}), vec({-1, 0}), seg_lmo), 1.0 * 0 - (-1.0));
  EXPECT_THROW(fw_gap_exact(vec({0, 0}), vec({1, 0}), SolutionSetLmo{}), Unsupported);
}

TEST(FwGapProperty, NonnegativeOnSolutionSet) {
  Rng rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vector> verts;
  for (int i = 0; i < 5; ++i) verts.push_back(Vector::Random(3));
  const FeasibleSet poly(PolytopeByVertices{verts});
  const SolutionSetLmo solset = [&](const Vector& c) { return lmo(poly, c); };
  for (int trial = 0; trial < 500; ++trial) {
    Vector w(5);
    for (int i = 0; i < 5; ++i) w(i) = u(rng);
    w /= w.sum();
    Vector x = Vector::Zero(3);
    for (int i = 0; i < 5; ++i) x += w(i) * verts[static_cast<std::size_t>(i)];
    Vector g(3);
    for (Index i = 0; i < 3; ++i) g(i) = n(rng);
    EXPECT_GE(fw_gap_exact(x, g, solset), -1e-12);
  }
}

TEST(SupportSequence, KnownValues) {
  EXPECT_EQ(support_seq_st(2, 1.0), 4.0 / 81.0);
  for (double omega : {0.5, 2.0 / 3.0, 1.0}) {
    for (long t = 2; t <= 10000; ++t) {
      ASSERT_LE(support_seq_st(t, omega), std::pow(t + 1.0, -omega)) << t << " " << omega;
    }
  }
}

TEST(SupportSequence, RecurrenceMatchesDoubleSum) {
  for (double omega : {0.3, 0.5, 2.0 / 3.0, 1.0}) {
    for (long t = 2; t <= 200; t += 7) {
      EXPECT_NEAR(support_seq_st(t, omega), oracles::support_seq_direct(t, omega), 1e-14);
    }
  }
  EXPECT_THROW(support_seq_st(1, 1.0), InvalidArgument);
  EXPECT_THROW(support_seq_st(5, 0.0), InvalidArgument);
}

TEST(EstimatorUpdates, ScalarExamples) {
  EXPECT_DOUBLE_EQ(storm_update(1.0, 2.0, 1.5, 0.5), 1.75);
  EXPECT_DOUBLE_EQ(spider_update(1.0, 2.0, 1.8), 1.2);
  // alpha = 1 discards the history.
  EXPECT_DOUBLE_EQ(storm_update(123.0, 2.0, 1.5, 1.0), 2.0);
}
