#ifndef MPIRK_ERRORS_HPP
#define MPIRK_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mpirk {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

/// Narrowing conversion produced a non-finite entry.
class NonFiniteConversion : public Error {
 public:
  using Error::Error;
};

class RootFindingFailure : public Error {
 public:
  using Error::Error;
};

class TransformCheckFailure : public Error {
 public:
  using Error::Error;
};

/// I - zA is singular: z is a pole of the stability function.
class SingularAtZ : public Error {
 public:
  using Error::Error;
};

class RefinementStalled : public Error {
 public:
  using Error::Error;
};

// Solver failures that the step controller recovers from by shrinking h.
class RecoverableSolverFailure : public Error {
 public:
  using Error::Error;
};

class KrylovBreakdown : public RecoverableSolverFailure {
 public:
  using RecoverableSolverFailure::RecoverableSolverFailure;
};

class KrylovNotConverged : public RecoverableSolverFailure {
 public:
  using RecoverableSolverFailure::RecoverableSolverFailure;
};

class InnerDivergence : public RecoverableSolverFailure {
 public:
  using RecoverableSolverFailure::RecoverableSolverFailure;
};

class ZeroDenominator : public Error {
 public:
  using Error::Error;
};

class StepFailed : public Error {
 public:
  using Error::Error;
};

class MaxStepsExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace mpirk

#endif  // MPIRK_ERRORS_HPP
