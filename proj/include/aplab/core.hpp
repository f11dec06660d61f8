#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace aplab {

using Index = Eigen::Index;
using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;
using VectorXi = Eigen::VectorXi;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input or configuration: a precondition or a type invariant failed.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The winding matrix has a rational dependence, so its orbit is not dense.
class ResonanceError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A combinatorial or nested-search size guard was exceeded.
class GuardError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An iterative solver did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// A monitored numerical property (monotone decay etc.) was violated.
class PropertyViolation : public Error {
 public:
  using Error::Error;
};

/// Counts entries into expensive numerical kernels. Used to verify that
/// configuration validation happens before any numerical work.
std::uint64_t work_counter();
void count_work();
void reset_work_counter();

/// Distance to the nearest integer, in [0, 1/2].
inline double dist_to_int(double t) {
  return std::abs(t - std::nearbyint(t));
}

}  // namespace aplab
