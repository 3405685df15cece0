#pragma once

#include <stdexcept>
#include <string>

namespace twsolve {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid argument values (nonpositive scales, empty spans, bad counts...).
class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// Travelling-wave frame with h = tau*v^2 - kappa <= 0: the scaling to the
/// normalized equation is undefined.
class NonHyperbolicFrame : public Error {
 public:
  using Error::Error;
};

/// Step size underflow / blowup guard tripped during adaptive integration.
class StepSizeUnderflow : public Error {
 public:
  using Error::Error;
};

class MaxStepsExceeded : public Error {
 public:
  using Error::Error;
};

/// A manifold shot failed to reach the Poincare section within its budget.
class SectionMiss : public Error {
 public:
  using Error::Error;
};

/// Root bracketing failed: the mismatch has the same sign at both ends.
class NoSignChange : public Error {
 public:
  using Error::Error;
};

/// calibrate_b1 found no bracket for the series amplitude.
class CalibrationFailed : public Error {
 public:
  using Error::Error;
};

/// A recurrence divisor L(k) vanished; the series coefficient is undefined.
class ResonantIndex : public Error {
 public:
  explicit ResonantIndex(int k)
      : Error("resonant index k=" + std::to_string(k)), index(k) {}
  int index;
};

/// Quadrature integrand left the real domain in the interior of the interval.
class RadicandNegative : public Error {
 public:
  using Error::Error;
};

/// Endpoint root of the quadrature radicand is not simple.
class TurningPointOrderTooHigh : public Error {
 public:
  using Error::Error;
};

/// Reserved: a real-root extraction found no real roots.
class NoRealRoots : public Error {
 public:
  using Error::Error;
};

/// A catalog case was built with parameters violating its admissibility
/// conditions; the message names the violated inequality.
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

/// The denominator polynomial of a rational-exponential wave is identically 0.
class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

/// Wave evaluation at (numerically) a pole of the profile.
class PoleAt : public Error {
 public:
  explicit PoleAt(double xi_)
      : Error("wave evaluated at a pole, xi=" + std::to_string(xi_)), xi(xi_) {}
  double xi;
};

/// A residual sample landed on a pole; samples must be pole-filtered first.
class PoleInSampleSet : public Error {
 public:
  using Error::Error;
};

}  // namespace twsolve
