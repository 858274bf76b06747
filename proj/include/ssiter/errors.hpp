#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssiter {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ZeroDiagonal : public Error {
 public:
  explicit ZeroDiagonal(std::size_t row)
      : Error("zero diagonal entry at row " + std::to_string(row)), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class Singular : public Error {
 public:
  explicit Singular(std::size_t column)
      : Error("matrix is singular (no usable pivot in column " + std::to_string(column) + ")"),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DominanceViolated : public Error {
 public:
  using Error::Error;
};

class BadCovariance : public Error {
 public:
  using Error::Error;
};

// The contraction hypothesis of the error envelopes fails (||B||_inf >= 1, or
// the matrix is not normalized diagonally dominant).
class NotContractive : public Error {
 public:
  explicit NotContractive(double norm_b)
      : Error("iteration matrix is not contractive: ||B||_inf = " + std::to_string(norm_b)),
        norm_b_(norm_b) {}
  NotContractive(double norm_b, const std::string& what) : Error(what), norm_b_(norm_b) {}
  double norm_b() const noexcept { return norm_b_; }

 private:
  double norm_b_;
};

class TooFewSamples : public Error {
 public:
  using Error::Error;
};

}  // namespace ssiter
