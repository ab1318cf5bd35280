#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace splab {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid geometric parameters or parameters outside a formula's range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A geometric construction produced an empty set (empty mask, eroded region).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Configured size limits (cell cap, solve budget) would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a precondition (shape mismatch, zero mass, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed. Carries the residual history when available.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::vector<double> history = {})
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace splab
