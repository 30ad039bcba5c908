#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kernelconv {

/// Base class for every error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Grid window mismatch or malformed grid parameters.
struct GridError : Error {
  using Error::Error;
};

/// Malformed shape or sequence description (degenerate radius, bad free variables, ...).
struct SpecError : Error {
  using Error::Error;
};

/// Syntax error in an expression; what() is formatted "offset:message" with a byte offset.
struct ParseError : Error {
  ParseError(std::size_t offset, const std::string& message)
      : Error(std::to_string(offset) + ":" + message), offset(offset) {}
  std::size_t offset;
};

/// Numeric evaluation failure (indeterminate form, +infinity, domain error).
struct EvalError : Error {
  using Error::Error;
};

/// Scalar field sampling produced a value outside the representable range.
struct FieldError : Error {
  using Error::Error;
};

/// Operation requires a tamed sequence (or a base point inside the sublevel set).
struct TamenessError : Error {
  using Error::Error;
};

/// Claimed monotone direction refuted by a sampled pair of domains.
struct MonotoneError : Error {
  using Error::Error;
};

/// Operation restricted to a sequence class (e.g. periodic tails only).
struct ClassError : Error {
  using Error::Error;
};

/// Metric computation on unsuitable masks (empty operand, window mismatch).
struct MetricError : Error {
  using Error::Error;
};

/// Config rejected; message starts with a JSON-pointer-style path of the offending key.
struct ValidationError : Error {
  using Error::Error;
};

/// Internal consistency assertion failed; indicates a bug, not bad input.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace kernelconv
