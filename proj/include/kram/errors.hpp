#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kram {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition (a = 0, left >= right, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An internal consistency check failed. Always indicates a bug.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// A limit at infinity did not stabilize within the sampling schedule.
class NotInSpaceError : public Error {
 public:
  NotInSpaceError(std::string what, std::vector<std::pair<double, double>> evidence)
      : Error(std::move(what)), evidence_(std::move(evidence)) {}

  /// (x, sampled ratio) pairs collected before giving up.
  const std::vector<std::pair<double, double>>& evidence() const noexcept { return evidence_; }

 private:
  std::vector<std::pair<double, double>> evidence_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kram
