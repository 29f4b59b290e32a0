#pragma once

#include <stdexcept>
#include <string>

namespace catenc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a precondition (bad CSV, schema mismatch, missing target, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An argument outside its documented domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped without meeting its convergence criterion.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int iterations, double objective)
      : Error(what), iterations_(iterations), objective_(objective) {}

  int iterations() const noexcept { return iterations_; }
  double objective() const noexcept { return objective_; }

 private:
  int iterations_;
  double objective_;
};

}  // namespace catenc
