#pragma once

#include <stdexcept>
#include <string>

namespace advsvm {

class Error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A symmetric matrix failed a positive-definiteness requirement.
class NotPdError : public Error {
  using Error::Error;
};

// A dataset is too small or lacks a class needed for fitting.
class InsufficientDataError : public Error {
  using Error::Error;
};

// A CSV or JSON input could not be interpreted.
class ParseError : public Error {
  using Error::Error;
};

// A policy with all-zero decision function where a direction is required.
class DegeneratePolicyError : public Error {
  using Error::Error;
};

// Ill-posed conic program detected while building (shape or ownership).
class ConstructionError : public Error {
  using Error::Error;
};

// A conic solve did not reach an acceptable status.
class SolverError : public Error {
 public:
  SolverError(const std::string& msg, std::string status)
      : Error(msg), status_(std::move(status)) {}
  const std::string& status() const { return status_; }

 private:
  std::string status_;
};

// An input policy violates its player's feasibility constraint.
class FeasibilityError : public Error {
  using Error::Error;
};

}  // namespace advsvm
