#pragma once

#include <stdexcept>
#include <string>

namespace cclab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar argument violates an operation precondition (dt <= 0, N < 2, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A region or point is not representable on the grid it is used with.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on survival is impossible: the surviving mass vanished.
class DegenerateConditioningError : public Error {
 public:
  using Error::Error;
};

/// A numerical guard tripped: mass reached an artificial box edge, the
/// particle ensemble collapsed, or a scheme drifted beyond tolerance.
class GuardViolation : public Error {
 public:
  using Error::Error;
};

/// Two evaluation routes that must agree did not, or a quadrature failed to
/// converge.
class AccuracyError : public Error {
 public:
  using Error::Error;
};

/// Not enough samples (or signal above the noise floor) to form an estimate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace cclab
