#pragma once

#include <stdexcept>
#include <string>

namespace splab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (r < 0, n <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid run or mesh configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A factorization or dense solve failed.
class LinearAlgebraError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// Newton Jacobian could not be factored; the linearization has a kernel.
class SingularJacobianError : public ConvergenceError {
 public:
  using ConvergenceError::ConvergenceError;
};

/// Fewer bound states than requested were resolved on the current box.
class InsufficientDomainError : public Error {
 public:
  InsufficientDomainError(const std::string& what, int found)
      : Error(what), found_(found) {}
  int found() const noexcept { return found_; }

 private:
  int found_;
};

class SpectralStructureError : public Error {
 public:
  using Error::Error;
};

/// Zero-crossing count changed along a branch.
class BranchIntegrityError : public Error {
 public:
  using Error::Error;
};

class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace splab
