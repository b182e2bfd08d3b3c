#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "sbcg/errors.hpp"

namespace sbcg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Every run owns exactly one engine; nothing in the library touches a global RNG.
using Rng = std::mt19937_64;

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline void require(bool condition, const char* message) {
  if (!condition) throw InvalidArgument(message);
}

inline void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) throw InvalidArgument(std::string("dimension mismatch: ") + what);
}

}  // namespace sbcg
