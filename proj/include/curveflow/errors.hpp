#pragma once

#include <stdexcept>
#include <string>

namespace curveflow {

/// Base class for all errors raised by the solver library.
class FlowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The parametrization degenerated: |u_zeta| fell below the regularity floor.
class DegenerateCurveError : public FlowError {
 public:
  using FlowError::FlowError;
};

/// Newton iteration did not reach the residual tolerance.
class NonConvergenceError : public FlowError {
 public:
  using FlowError::FlowError;
};

/// The Newton linear system could not be factorized.
class SingularJacobianError : public FlowError {
 public:
  using FlowError::FlowError;
};

/// A run configuration violated the schema or one of its invariants.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace curveflow
