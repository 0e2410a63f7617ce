#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace gwgp {

// Root of every exception raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input or configuration; the CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown; the CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidHyper : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooFewPoints : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateData : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptySignal : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingParameter : public ValidationError {
 public:
  explicit MissingParameter(std::string name)
      : ValidationError("missing parameter: " + name), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class SingularMatrix : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonpositiveVariance : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FactorizationError : public NumericalError {
 public:
  FactorizationError(const std::string& what, double jitter)
      : NumericalError(what + " (final jitter " + std::to_string(jitter) + ")"),
        jitter_(jitter) {}
  double jitter() const noexcept { return jitter_; }

 private:
  double jitter_;
};

}  // namespace gwgp
