#pragma once

#include <stdexcept>
#include <string>

namespace qcheck {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad flag, bad flag combination, or a reference to something that does not exist.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data violates an invariant (too few rows, degenerate W, zero variance, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A CSV cell or model line could not be parsed. Carries the coordinates.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : DataError(what), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// The quantile regression could not be computed (rank deficiency, failed replication).
class FitError : public Error {
 public:
  using Error::Error;
};

/// All pairwise kernel weights vanished, so the variance normalizer is zero.
class DegenerateVarianceError : public DataError {
 public:
  using DataError::DataError;
};

/// Should never happen; signals a broken solver invariant.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcheck
