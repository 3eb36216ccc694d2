#pragma once

#include <stdexcept>
#include <string>

namespace cvpm {

/// Raised when a caller violates a documented precondition (bad dimensions,
/// negative radii, empty schedules, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an optimization problem that should have a solution is found
/// infeasible, e.g. an empty first-step input set.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative numerical routine fails to converge or hits an
/// ill-conditioned system.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration files that cannot be read or do not match the schema.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cvpm
