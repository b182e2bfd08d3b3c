#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "sbcg/estimators.hpp"
#include "sbcg/problems/least_squares.hpp"
#include "sbcg/problems/toy.hpp"

using namespace sbcg;

namespace {

std::shared_ptr<LeastSquaresOracle> random_ls(Index n, Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix A(n, d);
  Vector b(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) A(i, j) = g(rng);
    b(i) = g(rng);
  }
  return std::make_shared<LeastSquaresOracle>(A, b);
}

BilevelProblem ls_problem(Index n_u, Index n_l, Index d, std::uint64_t seed) {
  BilevelProblem p{"ls", random_ls(n_u, d, seed), random_ls(n_l, d, seed + 1), FeasibleSet(L1Ball{1.0, d}), {}, {}, {}};
  return p;
}

Vector random_point(Index d, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Vector x(d);
  for (Index i = 0; i < d; ++i) x(i) = g(rng);
  return project(FeasibleSet(L1Ball{1.0, d}), x);
}

// Records which samples were evaluated at which point.
class RecordingOracle final : public StochasticOracle {
 public:
  explicit RecordingOracle(Index n) : n_(n) {}
  Index dimension() const override { return 2; }
  OracleKind kind() const override { return OracleKind::kFiniteSum; }
  Index num_components() const override { return n_; }
  double value(const Vector& x, Sample s) const override {
    seen[x(0)].push_back(s);
    return x(0) * static_cast<double>(s);
  }
  void accumulate_grad(const Vector& x, Sample s, double w, Vector& out) const override {
    seen[x(0)].push_back(s);
    out(0) += w * static_cast<double>(s);
  }
  mutable std::map<double, std::vector<Sample>> seen;

 private:
  Index n_;
};

}  // namespace

TEST(StormInit, ZeroNoiseIsExact) {
  Vector h(2), c(2), u(2);
  h << 1.0, 2.0;
  c << 0.1, -0.2;
  u << 1.0, 0.0;
  const BilevelProblem p = noisy_quadratic_problem(h, c, 1.0, 0.0, 0.0, u);
  Rng rng(1);
  LevelStreams s(rng);
  const Vector x = random_point(2, 3);
  const StormState st = storm_init(x, p, s, 1);
  EXPECT_LT((st.grad_g_est() - p.lower->full_grad(x)).norm(), 1e-15);
  EXPECT_NEAR(st.g_val_est(), p.lower->full_value(x), 1e-15);
  EXPECT_EQ(st.queries, 2);
}

TEST(StormInit, SingleComponentIsExact) {
  const BilevelProblem p = ls_problem(1, 1, 3, 5);
  Rng rng(2);
  LevelStreams s(rng);
  const Vector x = random_point(3, 4);
  const StormState st = storm_init(x, p, s, 4);
  EXPECT_LT((st.grad_f_est() - p.upper->full_grad(x)).norm(), 1e-12);
  EXPECT_LT((st.grad_g_est() - p.lower->full_grad(x)).norm(), 1e-12);
  EXPECT_NEAR(st.g_val_est(), p.lower->full_value(x), 1e-12);
}

TEST(StormInit, MonteCarloMeanIsUnbiased) {
  Vector h(2), c(2), u(2);
  h << 1.0, 0.5;
  c << 0.2, 0.1;
  u << 0.0, 1.0;
  const double sigma = 1.0;
  const BilevelProblem p = noisy_quadratic_problem(h, c, 1.0, sigma, sigma, u);
  const Vector x = random_point(2, 9);
  const int N = 10000;
  Vector mean = Vector::Zero(2);
  double vmean = 0.0;
  Rng rng(11);
  for (int i = 0; i < N; ++i) {
    LevelStreams s(rng);
    const StormState st = storm_init(x, p, s, 1);
    mean += st.grad_g_est() / N;
    vmean += st.g_val_est() / N;
  }
  // Per-coordinate std is below sigma, so 3 sigma / sqrt(N) is a valid band.
  EXPECT_LT((mean - p.lower->full_grad(x)).cwiseAbs().maxCoeff(), 3.0 * sigma / std::sqrt(N));
  EXPECT_LT(std::abs(vmean - p.lower->full_value(x)), 3.0 * sigma / std::sqrt(N));
}

TEST(StormStep, UnitWeightsGiveFreshBatch) {
  const BilevelProblem p = ls_problem(30, 40, 3, 21);
  Rng rng(3);
  LevelStreams s(rng);
  const Vector x0 = random_point(3, 1), x1 = random_point(3, 2);
  StormState st = storm_init(x0, p, s, 2);
  LevelStreams copy = s;
  storm_step(st, x1, p, s, 1.0, 1.0, 1.0, 5);
  // Replay the same draws and average at x1 only.
  Vector gf = Vector::Zero(3), gg = Vector::Zero(3);
  double gv = 0.0;
  for (int i = 0; i < 5; ++i) p.upper->accumulate_grad(x1, p.upper->draw(copy.upper), 0.2, gf);
  for (int i = 0; i < 5; ++i) gv += 0.2 * p.lower->value_and_accumulate_grad(x1, p.lower->draw(copy.lower), 0.2, gg);
  EXPECT_LT((st.grad_f_est() - gf).norm(), 1e-12);
  EXPECT_LT((st.grad_g_est() - gg).norm(), 1e-12);
  EXPECT_NEAR(st.g_val_est(), gv, 1e-12);
  EXPECT_EQ(st.queries, 2 * 2 + 4 * 5);
  EXPECT_EQ(st.t, 1);
}

TEST(StormStep, StationaryPointWithoutNoiseKeepsEstimate) {
  Vector h(2), c(2), u(2);
  h << 1.0, 3.0;
  c << 0.3, 0.0;
  u << 1.0, 1.0;
  const BilevelProblem p = noisy_quadratic_problem(h, c, 1.0, 0.0, 0.0, u);
  Rng rng(5);
  LevelStreams s(rng);
  const Vector x = random_point(2, 7);
  StormState st = storm_init(x, p, s, 1);
  const Vector before = st.grad_g_est();
  const double vb = st.g_val_est();
  for (int k = 0; k < 10; ++k) storm_step(st, x, p, s, 0.3, 0.3, 0.3, 2);
  EXPECT_EQ((st.grad_g_est() - before).norm(), 0.0);
  EXPECT_EQ(st.g_val_est(), vb);
}

TEST(StormStep, SameSamplesAtBothPoints) {
  auto rec = std::make_shared<RecordingOracle>(1000);
  BilevelProblem p{"rec", rec, rec, FeasibleSet(L1Ball{10.0, 2}), {}, {}, {}};
  Rng rng(8);
  LevelStreams s(rng);
  Vector x0(2), x1(2);
  x0 << 1.0, 0.0;
  x1 << 2.0, 0.0;
  StormState st = storm_init(x0, p, s, 1);
  rec->seen.clear();
  storm_step(st, x1, p, s, 0.5, 0.5, 0.5, 3);
  ASSERT_EQ(rec->seen.size(), 2u);
  EXPECT_EQ(rec->seen[1.0], rec->seen[2.0]);
}

TEST(SpiderStep, RefreshIsExactAndCorrectionCancels) {
  const BilevelProblem p = ls_problem(49, 100, 4, 31);
  Rng rng(4);
  LevelStreams s(rng);
  const Vector x0 = random_point(4, 5);
  SpiderState st = spider_init(x0, p);
  EXPECT_EQ(st.q_u, 7);
  EXPECT_EQ(st.S_l, 10);
  spider_step(st, x0, p, s);
  EXPECT_LE((st.grad_g_est() - p.lower->full_grad(x0)).norm(), 1e-10);
  EXPECT_LE((st.grad_f_est() - p.upper->full_grad(x0)).norm(), 1e-10);
  EXPECT_EQ(st.queries, 49 + 100);
  const Vector g = st.grad_g_est();
  const double v = st.g_val_est();
  spider_step(st, x0, p, s);  // same point: correction is zero
  EXPECT_EQ((st.grad_g_est() - g).norm(), 0.0);
  EXPECT_EQ(st.g_val_est(), v);
  EXPECT_EQ(st.queries, 49 + 100 + 2 * 7 + 2 * 10);
}

TEST(SpiderStep, RefreshScheduleFollowsEpochLength) {
  const BilevelProblem p = ls_problem(16, 16, 3, 41);
  Rng rng(6);
  LevelStreams s(rng);
  SpiderState st = spider_init(random_point(3, 1), p, 3, 2);
  for (int t = 0; t < 9; ++t) {
    const Vector x = random_point(3, 100 + t);
    spider_step(st, x, p, s);
    if (t % 3 == 0) {
      EXPECT_LE((st.grad_g_est() - p.lower->full_grad(x)).norm(), 1e-10) << t;
    }
  }
  EXPECT_EQ(st.queries, 3 * 2 * 16 + 6 * 2 * 2 * 2);
}

TEST(SpiderStep, RejectsStreamingOracles) {
  Vector h(1), c(1), u(1);
  h << 1.0;
  c << 0.0;
  u << 1.0;
  const BilevelProblem p = noisy_quadratic_problem(h, c, 1.0, 1.0, 1.0, u);
  EXPECT_THROW(spider_init(c, p), Unsupported);
}

TEST(Minibatch, SingleComponentAndZeroNoiseAreExact) {
  auto o = random_ls(1, 3, 2);
  Rng rng(1);
  const Vector x = random_point(3, 2);
  const MinibatchEstimate m = minibatch_estimate(*o, x, 7, rng);
  EXPECT_LT((m.grad - o->full_grad(x)).norm(), 1e-12);
  EXPECT_NEAR(m.value, o->full_value(x), 1e-12);
}

TEST(Minibatch, MonteCarloMeanIsUnbiased) {
  auto o = random_ls(50, 3, 12);
  const Vector x = random_point(3, 4);
  const Vector exact = o->full_grad(x);
  // Per-coordinate sample spread of the component gradients.
  Vector var = Vector::Zero(3);
  for (Index i = 0; i < 50; ++i) var += (o->sample_grad(x, static_cast<Sample>(i)) - exact).cwiseAbs2() / 50.0;
  const int N = 10000, batch = 4;
  Rng rng(13);
  Vector mean = Vector::Zero(3);
  for (int k = 0; k < N; ++k) mean += minibatch_estimate(*o, x, batch, rng).grad / N;
  for (Index j = 0; j < 3; ++j) {
    EXPECT_LT(std::abs(mean(j) - exact(j)), 3.0 * std::sqrt(var(j)) / std::sqrt(double(N) * batch)) << j;
  }
}

TEST(FiniteSum, ComponentMeanMatchesFullPass) {
  auto o = random_ls(37, 5, 17);
  const Vector x = random_point(5, 3);
  Vector g = Vector::Zero(5);
  double v = 0.0;
  for (Index i = 0; i < 37; ++i) v += o->value_and_accumulate_grad(x, static_cast<Sample>(i), 1.0 / 37, g) / 37;
  EXPECT_LT((g - o->full_grad(x)).norm(), 1e-12);
  EXPECT_NEAR(v, o->full_value(x), 1e-12);
  // The base-class pairwise pass agrees with the closed form.
  EXPECT_LT((o->StochasticOracle::full_grad(x) - o->full_grad(x)).norm(), 1e-12);
}
