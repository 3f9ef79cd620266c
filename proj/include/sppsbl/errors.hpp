#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sppsbl {

/// Base class for every error raised by the library. The C API maps each
/// subclass onto one status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Raised when the posterior precision matrix cannot be factored even after
/// jitter escalation. Carries every jitter level that was tried.
class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, std::vector<double> jitters)
      : Error(what), attempted_jitter(std::move(jitters)) {}

  std::vector<double> attempted_jitter;
};

/// A guarantee that the theory says cannot fail did fail.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sppsbl
