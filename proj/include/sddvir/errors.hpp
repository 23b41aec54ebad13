#pragma once

#include <stdexcept>
#include <string>

namespace sddvir {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// History segment used in a way the solver never should (too short, lag out of range).
class HistoryError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite state produced by a time step.
class SolverAbort : public std::runtime_error {
 public:
  SolverAbort(const std::string& what, double last_good_time)
      : std::runtime_error(what), last_good_time_(last_good_time) {}

  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

}  // namespace sddvir
