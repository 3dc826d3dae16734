#pragma once

#include <stdexcept>
#include <string>

namespace roomimp {

// Base of every error raised by the library. Configuration-type errors derive
// from ConfigurationError, numerical breakdowns from NumericalError; the CLI
// maps the two families to distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class OutOfDomain : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class InvalidImpedance : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class InvalidSpec : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class PlacementError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class InvalidMoments : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

/// Raised when a factorization breaks down or a solve misses its residual
/// bound; at a discrete resonance k^2 is (close to) a generalized eigenvalue.
class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Every likelihood weight underflowed to zero in double precision.
class DegenerateWeights : public NumericalError {
 public:
  DegenerateWeights(const std::string& what, double max_log_likelihood)
      : NumericalError(what), max_log_likelihood_(max_log_likelihood) {}

  double max_log_likelihood() const noexcept { return max_log_likelihood_; }

 private:
  double max_log_likelihood_;
};

}  // namespace roomimp
