#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include "sbcg/problem.hpp"

namespace sbcg {

/// Sizes of a continual dictionary-learning instance. m: signal dimension,
/// q: atoms in the true dictionary, p / p_new: atoms used by the old / new
/// dataset, n / n_new: samples per dataset.
struct DictionaryDims {
  Index m = 15, q = 30, p = 24, p_new = 12, n = 100, n_new = 100;
  Index nnz = 5;
  double delta = 3.0;  // l1 radius of each coefficient column
  double noise = 0.01;

  static DictionaryDims desk() { return {}; }
  static DictionaryDims full() { return {25, 50, 40, 20, 250, 250, 5, 3.0, 0.01}; }

  // Atoms the two sub-dictionaries have in common: the new one takes every
  // atom the old one lacks, the rest is shared.
  Index shared() const { return p_new - (q - p); }

  void validate() const {
    require(m >= 1 && n >= 1 && n_new >= 1, "dictionary sizes must be positive");
    require(p >= 1 && p < q, "old dictionary must be a strict subset of the atoms");
    require(p_new >= q - p && p_new <= q, "new dictionary must contain every atom missing from the old one");
    require(nnz >= 1 && nnz <= std::min(p, p_new), "too many nonzeros per coefficient vector");
    require(delta > 0 && noise >= 0, "invalid radius or noise level");
  }
};

struct DictionaryProblem {
  DictionaryDims dims;
  Matrix D_true;  // m x q, unit-norm columns
  std::vector<Index> old_atoms, new_atoms;  // columns of D_true used by each dataset
  Matrix A;       // m x n
  Matrix A_new;   // m x n_new
};

inline constexpr double kRecoveryThreshold = 0.9;

/// Fraction of reference columns matched by some learned column with
/// |<d*_i, d_j>| strictly above the threshold.
inline double recovery_rate(const Matrix& D, const Matrix& D_star) {
  require(D.rows() == D_star.rows(), "dictionaries have different signal dimensions");
  if (D_star.cols() == 0) return 0.0;
  const Matrix G = (D_star.transpose() * D).cwiseAbs();
  Index hit = 0;
  for (Index i = 0; i < G.rows(); ++i) {
    if (G.cols() > 0 && G.row(i).maxCoeff() > kRecoveryThreshold) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(D_star.cols());
}

namespace detail {

inline Matrix sparse_codes(Index atoms, Index count, Index nnz, Rng& rng) {
  Matrix X = Matrix::Zero(atoms, count);
  std::uniform_real_distribution<double> mag(0.2, 1.0);
  std::bernoulli_distribution sign(0.5);
  std::vector<Index> idx(static_cast<std::size_t>(atoms));
  for (Index k = 0; k < count; ++k) {
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    for (Index j = 0; j < nnz; ++j) X(idx[static_cast<std::size_t>(j)], k) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  }
  return X;
}

inline Matrix select_columns(const Matrix& M, const std::vector<Index>& cols) {
  Matrix out(M.rows(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Index>(j)) = M.col(cols[j]);
  return out;
}

// Gaussian columns scaled to l1 norm delta.
inline Matrix l1_normalized_gaussian(Index rows, Index cols, double delta, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix X(rows, cols);
  for (Index k = 0; k < cols; ++k) {
    for (Index i = 0; i < rows; ++i) X(i, k) = gauss(rng);
    X.col(k) *= delta / X.col(k).lpNorm<1>();
  }
  return X;
}

// Column-wise LMO over unit Euclidean balls.
inline Matrix ball_columns_lmo(const Matrix& G) {
  Matrix S = Matrix::Zero(G.rows(), G.cols());
  for (Index j = 0; j < G.cols(); ++j) {
    const double nrm = G.col(j).norm();
    if (nrm > 0) S.col(j) = -G.col(j) / nrm;
  }
  return S;
}

// Column-wise LMO over l1 balls of radius delta (lowest index on ties).
inline Matrix l1_columns_lmo(const Matrix& G, double delta) {
  Matrix S = Matrix::Zero(G.rows(), G.cols());
  for (Index k = 0; k < G.cols(); ++k) {
    Index i = 0;
    G.col(k).cwiseAbs().maxCoeff(&i);
    if (G(i, k) > 0) S(i, k) = -delta;
    if (G(i, k) < 0) S(i, k) = delta;
  }
  return S;
}

}  // namespace detail

/// Synthetic instance: unit-norm Gaussian atoms, sparse codes with nnz
/// entries of magnitude in [0.2, 1], Gaussian noise.
inline DictionaryProblem gen_dictionary_data(std::uint64_t seed, const DictionaryDims& dims = DictionaryDims::desk()) {
  dims.validate();
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DictionaryProblem pr;
  pr.dims = dims;
  pr.D_true.resize(dims.m, dims.q);
  for (Index j = 0; j < dims.q; ++j) {
    for (Index i = 0; i < dims.m; ++i) pr.D_true(i, j) = gauss(rng);
    pr.D_true.col(j).normalize();
  }
  std::vector<Index> perm(static_cast<std::size_t>(dims.q));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  pr.old_atoms.assign(perm.begin(), perm.begin() + dims.p);
  // Every atom outside the old dictionary, plus shared ones drawn from it.
  pr.new_atoms.assign(perm.begin() + dims.p, perm.end());
  std::vector<Index> pool = pr.old_atoms;
  std::shuffle(pool.begin(), pool.end(), rng);
  pr.new_atoms.insert(pr.new_atoms.end(), pool.begin(), pool.begin() + dims.shared());
  std::sort(pr.old_atoms.begin(), pr.old_atoms.end());
  std::sort(pr.new_atoms.begin(), pr.new_atoms.end());

  auto dataset = [&](const std::vector<Index>& atoms, Index count) {
    const Matrix X = detail::sparse_codes(static_cast<Index>(atoms.size()), count, dims.nnz, rng);
    Matrix out = detail::select_columns(pr.D_true, atoms) * X;
    for (Index k = 0; k < out.cols(); ++k)
      for (Index i = 0; i < out.rows(); ++i) out(i, k) += dims.noise * gauss(rng);
    return out;
  };
  pr.A = dataset(pr.old_atoms, dims.n);
  pr.A_new = dataset(pr.new_atoms, dims.n_new);
  return pr;
}

/// Minimizer of (1/2n) ||A - (D + g (S - D)) X||_F^2 over g in [0, 1].
inline double dictionary_line_search(const Matrix& A, const Matrix& D, const Matrix& S, const Matrix& X) {
  const Matrix R = A - D * X;
  const Matrix E = (S - D) * X;
  const double den = E.squaredNorm();
  if (den <= 0) return 0.0;
  return std::clamp((R.cwiseProduct(E)).sum() / den, 0.0, 1.0);
}

struct TwoPhaseResult {
  Matrix D;  // m x p
  Matrix X;  // p x n
  std::vector<double> phase2_objective;  // objective after each phase-2 step
};

inline double old_dictionary_objective(const Matrix& A, const Matrix& D, const Matrix& X) {
  return (A - D * X).squaredNorm() / (2.0 * static_cast<double>(A.cols()));
}

/// Initial dictionary for the old dataset: joint Frank-Wolfe over (D, X) with
/// step 1/sqrt(t+1), then Frank-Wolfe on D alone with exact line search.
inline TwoPhaseResult dictionary_two_phase_init(const DictionaryProblem& pr, std::uint64_t seed,
                                                long phase1_iterations = 10000,
                                                long phase2_iterations = 10000) {
  const DictionaryDims& d = pr.dims;
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  TwoPhaseResult r;
  r.D.resize(d.m, d.p);
  for (Index j = 0; j < d.p; ++j) {
    for (Index i = 0; i < d.m; ++i) r.D(i, j) = gauss(rng);
    r.D.col(j).normalize();
  }
  r.X = detail::l1_normalized_gaussian(d.p, d.n, d.delta, rng);
  const double inv_n = 1.0 / static_cast<double>(d.n);
  for (long t = 0; t < phase1_iterations; ++t) {
    const Matrix R = pr.A - r.D * r.X;
    const Matrix gD = -inv_n * R * r.X.transpose();
    const Matrix gX = -inv_n * r.D.transpose() * R;
    const double g = 1.0 / std::sqrt(static_cast<double>(t) + 1.0);
    r.D = (1.0 - g) * r.D + g * detail::ball_columns_lmo(gD);
    r.X = (1.0 - g) * r.X + g * detail::l1_columns_lmo(gX, d.delta);
  }
  r.phase2_objective.reserve(static_cast<std::size_t>(phase2_iterations));
  for (long t = 0; t < phase2_iterations; ++t) {
    const Matrix gD = -inv_n * (pr.A - r.D * r.X) * r.X.transpose();
    const Matrix S = detail::ball_columns_lmo(gD);
    const double g = dictionary_line_search(pr.A, r.D, S, r.X);
    r.D = (1.0 - g) * r.D + g * S;
    r.phase2_objective.push_back(old_dictionary_objective(pr.A, r.D, r.X));
  }
  return r;
}

/// Upper level: (1/2n') sum_k ||a'_k - D x_k||^2 over the variable
/// [vec(D) (m x q, column-major); vec(X) (q x n')].
class DictionaryUpperOracle final : public StochasticOracle {
 public:
  DictionaryUpperOracle(Matrix A_new, Index q) : A_(std::move(A_new)), m_(A_.rows()), q_(q) {}

  Index dimension() const override { return m_ * q_ + q_ * A_.cols(); }
  OracleKind kind() const override { return OracleKind::kFiniteSum; }
  Index num_components() const override { return A_.cols(); }

  double value(const Vector& x, Sample s) const override { return 0.5 * residual(x, s).squaredNorm(); }
  void accumulate_grad(const Vector& x, Sample s, double weight, Vector& out) const override {
    value_and_accumulate_grad(x, s, weight, out);
  }
  double value_and_accumulate_grad(const Vector& x, Sample s, double weight, Vector& out) const override {
    const Index k = static_cast<Index>(s);
    const Vector r = residual(x, s);
    Eigen::Map<Matrix> gD(out.data(), m_, q_);
    gD.noalias() -= (weight * r) * code(x, k).transpose();
    out.segment(m_ * q_ + k * q_, q_).noalias() -= weight * (dict(x).transpose() * r);
    return 0.5 * r.squaredNorm();
  }

  double full_value(const Vector& x) const override {
    return (A_ - dict(x) * codes(x)).squaredNorm() / (2.0 * static_cast<double>(A_.cols()));
  }
  Vector full_grad(const Vector& x) const override {
    const double inv_n = 1.0 / static_cast<double>(A_.cols());
    const Matrix R = A_ - dict(x) * codes(x);
    Vector g(dimension());
    Eigen::Map<Matrix>(g.data(), m_, q_) = -inv_n * R * codes(x).transpose();
    Eigen::Map<Matrix>(g.data() + m_ * q_, q_, A_.cols()) = -inv_n * dict(x).transpose() * R;
    return g;
  }

 private:
  Eigen::Map<const Matrix> dict(const Vector& x) const { return {x.data(), m_, q_}; }
  Eigen::Map<const Matrix> codes(const Vector& x) const { return {x.data() + m_ * q_, q_, A_.cols()}; }
  Eigen::Map<const Vector> code(const Vector& x, Index k) const { return {x.data() + m_ * q_ + k * q_, q_}; }
  Vector residual(const Vector& x, Sample s) const {
    const Index k = static_cast<Index>(s);
    return A_.col(k) - dict(x) * code(x, k);
  }

  Matrix A_;
  Index m_, q_;
};

/// Lower level: (1/2n) sum_i ||a_i - D x_i||^2 with fixed padded codes; it
/// does not depend on the X block of the variable.
class DictionaryLowerOracle final : public StochasticOracle {
 public:
  DictionaryLowerOracle(Matrix A, Matrix X_fixed, Index n_new)
      : A_(std::move(A)), X_(std::move(X_fixed)), m_(A_.rows()), q_(X_.rows()), n_new_(n_new) {
    require(A_.cols() == X_.cols(), "codes and samples disagree");
  }

  Index dimension() const override { return m_ * q_ + q_ * n_new_; }
  OracleKind kind() const override { return OracleKind::kFiniteSum; }
  Index num_components() const override { return A_.cols(); }

  double value(const Vector& x, Sample s) const override { return 0.5 * residual(x, s).squaredNorm(); }
  void accumulate_grad(const Vector& x, Sample s, double weight, Vector& out) const override {
    value_and_accumulate_grad(x, s, weight, out);
  }
  double value_and_accumulate_grad(const Vector& x, Sample s, double weight, Vector& out) const override {
    const Vector r = residual(x, s);
    Eigen::Map<Matrix> gD(out.data(), m_, q_);
    gD.noalias() -= (weight * r) * X_.col(static_cast<Index>(s)).transpose();
    return 0.5 * r.squaredNorm();
  }

  double full_value(const Vector& x) const override {
    return (A_ - dict(x) * X_).squaredNorm() / (2.0 * static_cast<double>(A_.cols()));
  }
  Vector full_grad(const Vector& x) const override {
    Vector g = Vector::Zero(dimension());
    Eigen::Map<Matrix>(g.data(), m_, q_) = -(A_ - dict(x) * X_) * X_.transpose() / static_cast<double>(A_.cols());
    return g;
  }

  const Matrix& codes() const { return X_; }

 private:
  Eigen::Map<const Matrix> dict(const Vector& x) const { return {x.data(), m_, q_}; }
  Vector residual(const Vector& x, Sample s) const { return A_.col(static_cast<Index>(s)) - dict(x) * X_.col(static_cast<Index>(s)); }

  Matrix A_, X_;
  Index m_, q_, n_new_;
};

struct DictionaryInstance {
  BilevelProblem problem;
  Vector x0;  // padded initial dictionary and random codes
};

inline FeasibleSet dictionary_set(const DictionaryDims& d) {
  BlockProduct bp;
  bp.blocks.emplace_back(BallProductBlock{d.q, d.m});
  for (Index k = 0; k < d.n_new; ++k) bp.blocks.emplace_back(L1Ball{d.delta, d.q});
  return FeasibleSet(std::move(bp));
}

/// Bilevel instance built from the old-dataset initialization: the learned
/// dictionary padded with zero columns, codes padded with zero rows, and
/// Gaussian new-dataset codes normalized to l1 norm delta.
inline DictionaryInstance dictionary_oracles(const DictionaryProblem& pr, const Matrix& D_hat, const Matrix& X_hat,
                                             std::uint64_t seed) {
  const DictionaryDims& d = pr.dims;
  require(D_hat.rows() == d.m && D_hat.cols() == d.p, "initial dictionary has the wrong shape");
  require(X_hat.rows() == d.p && X_hat.cols() == d.n, "initial codes have the wrong shape");
  Matrix X_pad = Matrix::Zero(d.q, d.n);
  X_pad.topRows(d.p) = X_hat;

  auto upper = std::make_shared<DictionaryUpperOracle>(pr.A_new, d.q);
  auto lower = std::make_shared<DictionaryLowerOracle>(pr.A, X_pad, d.n_new);
  DictionaryInstance inst{BilevelProblem{"dictionary", upper, lower, dictionary_set(d), {}, {}, {}, "recovery_rate"},
                          Vector::Zero(upper->dimension())};

  double xhat_sq = 0.0, lip = 0.0, aprime = 0.0;
  for (Index i = 0; i < d.n; ++i) {
    const double l1 = X_pad.col(i).lpNorm<1>();
    xhat_sq = std::max(xhat_sq, X_pad.col(i).squaredNorm());
    // ||grad|| <= ||r|| ||x_i|| with ||D x_i|| <= ||x_i||_1 on the ball product.
    lip = std::max(lip, (pr.A.col(i).norm() + l1) * X_pad.col(i).norm());
  }
  for (Index k = 0; k < d.n_new; ++k) aprime = std::max(aprime, pr.A_new.col(k).norm());
  ProblemConstants& c = inst.problem.constants;
  c.L_g = std::max(xhat_sq, 1e-12);
  c.L_l = std::max(lip, 1e-12);
  c.L_f = d.delta * d.delta + static_cast<double>(d.q) + aprime;
  c.sigma_g = 2.0 * c.L_l;
  c.sigma_f = 2.0 * (aprime + d.delta) * (d.delta + std::sqrt(static_cast<double>(d.q)));
  double vmax = 0.0;
  for (Index i = 0; i < d.n; ++i) {
    const double r = pr.A.col(i).norm() + X_pad.col(i).lpNorm<1>();
    vmax = std::max(vmax, 0.5 * r * r);
  }
  c.sigma_l = vmax;
  c.D = inst.problem.set.diameter();

  const Matrix D_true = pr.D_true;
  const Index m = d.m, q = d.q;
  inst.problem.task_metric = [D_true, m, q](const Vector& x) {
    return recovery_rate(Eigen::Map<const Matrix>(x.data(), m, q), D_true);
  };

  Rng rng(seed);
  Eigen::Map<Matrix> D0(inst.x0.data(), d.m, d.q);
  D0.leftCols(d.p) = D_hat;
  Eigen::Map<Matrix>(inst.x0.data() + d.m * d.q, d.q, d.n_new) =
      detail::l1_normalized_gaussian(d.q, d.n_new, d.delta, rng);
  return inst;
}

}  // namespace sbcg
