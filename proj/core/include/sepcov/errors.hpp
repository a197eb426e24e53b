#pragma once

#include <stdexcept>
#include <string>

namespace sepcov {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain where the operation is defined
/// (Im z <= 0, eta <= 0, unsupported degrees of freedom, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Floating point breakdown: singular inner matrix, eigensolver failure,
/// non-finite iterate.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Iterative solve did not reach the requested tolerance, or converged to a
/// point outside the admissible (positive imaginary part) branch.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

/// Malformed input document. The message names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace sepcov
