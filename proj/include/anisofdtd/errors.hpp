#pragma once

#include <stdexcept>
#include <string>

namespace anisofdtd {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected user input such as bad dimensions or non-SPD tensors.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Non-finite fields, solver breakdown, failed eigen decomposition.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Power iteration hit its cap; carries the last estimate.
class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, double last_estimate)
      : NumericalError(what), last_estimate_(last_estimate) {}
  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

/// Problem size exceeds a desk-scale guard without an explicit override.
class GuardViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace anisofdtd
