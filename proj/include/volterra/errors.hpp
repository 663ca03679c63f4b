#pragma once

#include <stdexcept>
#include <string>

namespace volterra {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: malformed config, out-of-range parameter, bad expression.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The measure violates finiteness or positivity of its total mass.
class InvalidKernel : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An argument lies outside the domain where a quantity is defined
/// (negative time, loglog of a small quadratic variation, y below inf F).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// 1/f blew up inside an integration range.
class SingularIntegrand : public Error {
 public:
  using Error::Error;
};

class InsufficientHorizon : public Error {
 public:
  using Error::Error;
};

/// The implicit step could not be resolved.
class StepFailure : public Error {
 public:
  StepFailure(double time, const std::string& what)
      : Error("step failure at t=" + std::to_string(time) + ": " + what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace volterra
