#pragma once

#include <stdexcept>
#include <string>

namespace cdlmg {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters or inconsistent inputs (CLI exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-convergence, broken structure, infeasible solve (CLI exit code 2).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The computed driving term does not have the banded even-offset structure.
class StructureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Harmonic-oscillator correction requested too close to the critical field h = 1.
class CriticalPointError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Successive eigenvectors on a ramp grid no longer overlap; the grid is too coarse.
class GridTooCoarseError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A least-squares operator decomposition left a residual above tolerance.
class DecompositionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace detail
}  // namespace cdlmg
