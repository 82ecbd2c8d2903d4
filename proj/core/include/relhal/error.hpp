// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace relhal {

// Base of every exception thrown by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or vector dimensions disagree with what an operation expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or parameter range (schedule bounds, split sizes...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Index or step outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Operation requires a trained/loaded model.
class StateError : public Error {
 public:
  using Error::Error;
};

// Malformed input data: CSV schema violations, unreadable files, bad JSON.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training or evaluation.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, std::ptrdiff_t layer = -1)
      : Error(what), layer_(layer) {}

  // Layer where the non-finite value was detected, -1 when not layer-specific.
  std::ptrdiff_t layer() const noexcept { return layer_; }

 private:
  std::ptrdiff_t layer_;
};

// Line-numbered parse failure.
class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace relhal
