#pragma once

#include <stdexcept>
#include <string>

namespace mtjsnn {

// Bad arguments to a model function (non-finite drive, dt <= 0, unknown id, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A state vector that violates its invariant, e.g. a non-unit magnetization.
class InvalidState : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mtjsnn
