#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>

namespace vecmvn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration (sizes, ranges, flags).
struct parameter_error : error {
  using error::error;
};

// Out-of-range element access.
struct index_error : error {
  using error::error;
};

// Malformed input data (CSV schemas, masks, limits).
struct data_error : error {
  using error::error;
};

// A local covariance block failed to factorize.
struct factorization_error : error {
  using error::error;
};

// Overflow/underflow/NaN conditions detected mid-computation.
struct numerical_error : error {
  using error::error;
};

}  // namespace vecmvn
