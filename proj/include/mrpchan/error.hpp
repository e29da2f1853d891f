#pragma once

#include <stdexcept>
#include <string>

namespace mrpchan {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (config files, parameters, maps).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A structural property (irreducibility, reachability) does not hold.
class StructuralError : public InputError {
 public:
  using InputError::InputError;
};

/// The requested computation is outside what the representation supports.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-convergence, degeneracy, refinement mismatch.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

class UnstableDensityError : public NumericError {
 public:
  using NumericError::NumericError;
};

class RefinementError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The filter statistic lost all its mass (an impossible observation).
class DegeneracyError : public NumericError {
 public:
  DegeneracyError(const std::string& what, long mark = -1, double waiting = -1.0)
      : NumericError(what), mark_(mark), waiting_(waiting) {}

  long mark() const noexcept { return mark_; }
  double waiting() const noexcept { return waiting_; }

 private:
  long mark_;
  double waiting_;
};

}  // namespace mrpchan
