#pragma once

#include <stdexcept>
#include <string>

namespace semivar {

/// Input data is malformed, inconsistent or too short. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation degenerated (singular covariance, quadrature budget exhausted,
/// every candidate at the likelihood floor). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semivar
