#pragma once

#include <stdexcept>
#include <string>

namespace varplap {

/// Mismatched grids or array sizes between operands.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Parameter outside the admissible range (e.g. exponent out of (1,inf)).
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input on which the requested expression is singular or undefined.
struct DegenerateInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An iterative kernel exhausted its iteration budget.
struct IterationLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite intermediate detected during assembly or evaluation.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Line search could not produce an acceptable step.
struct StepFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (e.g. boundary values).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace varplap
