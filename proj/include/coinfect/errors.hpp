#pragma once

#include <stdexcept>
#include <string>

namespace coinfect {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad input: parameter constraints, file parsing, model assumptions.
struct ValidationError : Error {
  using Error::Error;
};

struct AssumptionViolation : ValidationError {
  std::string assumption;
  AssumptionViolation(std::string name, const std::string& detail)
      : ValidationError("assumption violated: " + name + " (" + detail + ")"),
        assumption(std::move(name)) {}
};

// dP/dS <= 0 at a bifurcation point; scenario machinery cannot proceed.
struct AssumptionIIFailure : ValidationError {
  double K;
  explicit AssumptionIIFailure(double k)
      : ValidationError("dP/dS not positive at bifurcation point K=" + std::to_string(k)), K(k) {}
};

// A numerical routine failed (as opposed to being handed bad input).
struct NumericalError : Error {
  using Error::Error;
};

struct NoConvergence : NumericalError {
  using NumericalError::NumericalError;
};

struct ContinuationStall : NumericalError {
  double last_good_K;
  explicit ContinuationStall(double k)
      : NumericalError("continuation stalled, last good K=" + std::to_string(k)),
        last_good_K(k) {}
};

struct StepUnderflow : NumericalError {
  using NumericalError::NumericalError;
};

struct NonFinite : NumericalError {
  using NumericalError::NumericalError;
};

}  // namespace coinfect
