#pragma once

#include <stdexcept>
#include <string>

namespace hinfpath {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed data: inconsistent dimensions, non-finite entries, indefinite
// weights, D-hat nonzero where a strictly proper point is required, ...
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of the operation does not hold (unstable system
// passed to a norm, endpoint outside K_gamma, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be invertible is singular to working tolerance.
class SingularInputError : public Error {
 public:
  using Error::Error;
};

// Numerical failures: bisection bracket failure, iteration budgets, ...
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Riccati solve found no stabilizing solution (eigenvalues on or too close
// to the imaginary axis).
class NoStabilizingSolutionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Certificate construction could not reach the required strictness margins.
class CertificateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class LiftError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SynthesisError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// connect_via_bridge: the supplied controller is not a valid bridge.
class BridgeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hinfpath
