#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

// Bad input or configuration. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical kernel failed or produced out-of-contract output. Exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooManyTraps : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GridMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class WindowTooSmall : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonPositiveValues : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientHorizon : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConnectivityExhausted : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Biorthogonality of the left/right eigenvector pairs could not be restored,
// usually because the eigenspace is (nearly) defective.
class DefectivePencil : public NumericalError {
 public:
  DefectivePencil(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class StepSizeUnderflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class EnsembleFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace qwalk
