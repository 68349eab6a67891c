#pragma once

#include <stdexcept>
#include <string>

namespace gvae {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or index mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (CSV rows, ids, ranges).
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required (NaN loss, inf gradient).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Bad command / flag combinations at the CLI layer.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace gvae
