#pragma once

#include <stdexcept>
#include <string>

namespace msw {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition violated by an argument (empty input, p < 1, size mismatch).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A DistributionSpec or KernelSpec that breaks its invariants.
class InvalidSpecError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the given spec variant or dimension.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Non-finite intermediate value (overflow, failed quantile evaluation).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Input exceeds the size an exact algorithm is allowed to handle.
class ScaleError : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File system failure; message carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace msw
