#pragma once

#include <stdexcept>
#include <string>

namespace heatplan {

/// Base of all domain errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document; the message names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a data-model invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Parameter outside its documented range; the message names the parameter.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Operands that must share a grid frame or shape do not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace heatplan
