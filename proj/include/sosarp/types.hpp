#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sosarp {

/** Scalar type */
using Scalar = double;

/** Dense column vector */
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/** Dense matrix */
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when a caller breaks an operation's documented precondition.
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw ContractViolation(what);
}

}  // namespace sosarp
