#pragma once

#include <stdexcept>
#include <string>

namespace bsfr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent user configuration (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a function, e.g. a value outside range(W).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Base class for numerical failures (maps to CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace bsfr
