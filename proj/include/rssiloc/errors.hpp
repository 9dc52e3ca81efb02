#pragma once

#include <stdexcept>
#include <string>

namespace rssiloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The result is not representable in the scalar type (e.g. I0(800)).
class SaturationError : public Error {
 public:
  using Error::Error;
};

/// A variance weight came out non-finite.
class DegenerateWeightError : public Error {
 public:
  using Error::Error;
};

/// The estimate coincides with every reported anchor position, so the
/// gradient has no usable term.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// The Schur complement of the Fisher information is numerically singular.
class SingularGeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace rssiloc
