#pragma once

#include <stdexcept>
#include <string>

namespace nsdp {

/// Operands of incompatible sizes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The hypothesis of a mathematical statement does not hold for the given
/// data (e.g. a multiplier outside the normal cone, an infeasible point).
class HypothesisError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative method stopped at its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A branch that is unreachable in exact arithmetic was produced by
/// tolerance drift.
class AnomalyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input file.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nsdp
