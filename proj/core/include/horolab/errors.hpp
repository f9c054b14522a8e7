#pragma once

#include <stdexcept>
#include <string>

namespace horolab {

// Malformed input: unknown generator, bad config value, violated precondition.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An enumeration would exceed the configured element cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A checked invariant failed. The message names the invariant.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A limit-based quantity did not stabilize within its probe budget.
class ApproximationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A descent step needed a point outside the finite domain it runs on.
class WindowExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Schedule construction could not find a crossing within the segment cap.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace horolab
