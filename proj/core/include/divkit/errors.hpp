#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divkit {

/// Base class for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Short machine-readable category used in CLI error JSON.
  virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension_mismatch"; }
};

/// Malformed input file; `row()` is 1-based and counts the header as row 1.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }
  const char* kind() const noexcept override { return "parse_error"; }

 private:
  std::size_t row_;
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

/// The requested divergence is not finite / not defined for these inputs.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "admissibility"; }
};

/// Two atoms coincide under a singular (negative-order) kernel.
class SingularPairError : public AdmissibilityError {
 public:
  SingularPairError(std::size_t i, std::size_t j, const std::string& what)
      : AdmissibilityError(what), i_(i), j_(j) {}
  std::size_t first() const noexcept { return i_; }
  std::size_t second() const noexcept { return j_; }
  const char* kind() const noexcept override { return "singular_pair"; }

 private:
  std::size_t i_;
  std::size_t j_;
};

class DegenerateCovariance : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate_covariance"; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numerical"; }
};

}  // namespace divkit
