#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qieo {

/// Caller broke a documented precondition (dimension mismatch, index out of range, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Corruption budget leaves fewer clean rows than regression weights.
class InfeasibleBudget : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A solver produced a non-finite value or otherwise could not continue.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed dataset / experiment / results document.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive enumeration refused because the number of supports is too large.
class GuardRefusal : public std::runtime_error {
 public:
  GuardRefusal(const std::string& what, double count)
      : std::runtime_error(what), count_(count) {}
  double count() const noexcept { return count_; }

 private:
  double count_;
};

}  // namespace qieo
