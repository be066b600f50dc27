#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace stealthrisk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Worst-case impacts live on the extended half-line; +inf encodes "Unbounded".
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

inline bool is_unbounded(double v) { return std::isinf(v) && v > 0; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Transfer function from input to output is identically zero.
class DecoupledChannel : public Error {
 public:
  using Error::Error;
};

// Iterative solver stopped without meeting its tolerances.
class SolverFailure : public Error {
 public:
  using Error::Error;
};

class NoSecurePlacement : public Error {
 public:
  using Error::Error;
};

}  // namespace stealthrisk
