#pragma once

#include <stdexcept>
#include <string>

namespace rwdre {

// Invalid parameters or configuration. Maps to CLI exit code 2.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A simulation needed data outside the window/horizon it was built for.
class TruncationError : public std::runtime_error {
 public:
  TruncationError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}

  // First simulated time at which the window was insufficient.
  double time() const noexcept { return time_; }

 private:
  double time_;
};

// Replica discard cap exceeded or too few replicas for a CI. Exit code 3.
class StatisticalValidityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An exact invariant (path ordering, allowed-path validity, ...) failed.
// Always a bug. Exit code 4.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace rwdre
