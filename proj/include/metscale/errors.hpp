#pragma once

#include <stdexcept>
#include <string>

namespace metscale {

/// Caller broke an operation's preconditions (wrong base point, wrong manifold,
/// too few samples, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Input is well formed but outside the set where the operation is defined
/// (antipodal sphere log, non-SPD base, coordinate outside a chart box).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Post-operation renormalization had to move a result further than allowed.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A chart's metric function produced a non-symmetric or indefinite matrix.
class InvalidChart : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace metscale
