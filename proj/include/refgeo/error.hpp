#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace refgeo {

/// Base of every error raised by the library. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a precondition (bad k, size mismatch, out-of-range parameter).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content: bad npy header, bad CSV schema, mixed report rows.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed file whose values are unusable (NaN/Inf entries).
class DataError : public Error {
 public:
  DataError(const std::string& what, long row, long col)
      : Error(what), row_(row), col_(col) {}
  long row() const { return row_; }
  long col() const { return col_; }

 private:
  long row_;
  long col_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Input is valid but the requested quantity is undefined on it (coincident
/// points, constant data, vanishing slope variance).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Optimizer ran out of iterations; carries the best parameter vector seen.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best, double best_loglik)
      : Error(what), best_(std::move(best)), best_loglik_(best_loglik) {}
  const std::vector<double>& best_iterate() const { return best_; }
  double best_loglik() const { return best_loglik_; }

 private:
  std::vector<double> best_;
  double best_loglik_;
};

}  // namespace refgeo
