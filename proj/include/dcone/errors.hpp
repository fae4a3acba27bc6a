#pragma once

#include <stdexcept>
#include <string>

namespace dcone {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidParameter : Error {
  using Error::Error;
};

/// Profile fails one of the boundary-data admissibility conditions.
struct AdmissibilityViolation : Error {
  double condition1;
  double condition2;
  AdmissibilityViolation(const std::string& msg, double c1, double c2)
      : Error(msg), condition1(c1), condition2(c2) {}
};

/// The tangential trace integral does not close up over one revolution.
struct NonPeriodicZeta : Error {
  double residual;
  NonPeriodicZeta(const std::string& msg, double res)
      : Error(msg), residual(res) {}
};

/// Cone fields are 0-homogeneous in the gradient and undefined at x = 0.
struct OriginUndefined : Error {
  using Error::Error;
};

/// Quadrature too coarse to resolve the smoothing core.
struct UnresolvedCore : Error {
  using Error::Error;
};

/// Query point within the exclusion band of a sampled curve.
struct TooCloseToCurve : Error {
  using Error::Error;
};

/// Angle-sum winding did not round cleanly to an integer.
struct NonIntegerWinding : Error {
  double residual;
  NonIntegerWinding(const std::string& msg, double res)
      : Error(msg), residual(res) {}
};

/// No nonzero degree cell available to center a test function on.
struct NoWitness : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace dcone
