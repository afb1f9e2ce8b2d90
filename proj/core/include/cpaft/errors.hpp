#pragma once

#include <stdexcept>
#include <string>

namespace cpaft {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collinear triangle, zero-length front, or similar corrupted geometry.
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// User-supplied input (boundary file, parameters) failed validation.
class InputError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant failed at runtime. Always a bug or a mis-sized
/// overlap, never a user error.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// A rank saw a conflict-graph neighbour that its ghost layer does not hold.
class OverlapViolation : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

}  // namespace cpaft
