#pragma once

#include "sbcg/oracle.hpp"

namespace sbcg {

/// F(x) = (1/2n) ||A x - b||^2 with components 0.5 (<a_i, x> - b_i)^2.
class LeastSquaresOracle final : public StochasticOracle {
 public:
  LeastSquaresOracle(Matrix A, Vector b) : A_(std::move(A)), b_(std::move(b)) {
    if (A_.rows() != b_.size() || A_.rows() == 0 || A_.cols() == 0) {
      throw InvalidArgument("least-squares data has inconsistent or empty shape");
    }
  }

  Index dimension() const override { return A_.cols(); }
  OracleKind kind() const override { return OracleKind::kFiniteSum; }
  Index num_components() const override { return A_.rows(); }

  double value(const Vector& x, Sample s) const override {
    const double r = residual(x, s);
    return 0.5 * r * r;
  }
  void accumulate_grad(const Vector& x, Sample s, double weight, Vector& out) const override {
    out.noalias() += (weight * residual(x, s)) * A_.row(static_cast<Index>(s)).transpose();
  }
  double value_and_accumulate_grad(const Vector& x, Sample s, double weight,
                                   Vector& out) const override {
    const double r = residual(x, s);
    out.noalias() += (weight * r) * A_.row(static_cast<Index>(s)).transpose();
    return 0.5 * r * r;
  }

  Vector full_grad(const Vector& x) const override {
    return A_.transpose() * (A_ * x - b_) / static_cast<double>(A_.rows());
  }

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }

  // max_i ||a_i||^2: smoothness of every component.
  double max_row_norm_sq() const { return A_.rowwise().squaredNorm().maxCoeff(); }

 private:
  double residual(const Vector& x, Sample s) const {
    const Index i = static_cast<Index>(s);
    return A_.row(i).dot(x) - b_(i);
  }

  Matrix A_;
  Vector b_;
};

}  // namespace sbcg
