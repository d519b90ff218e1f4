#pragma once

#include <stdexcept>
#include <string>

namespace igpk {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (dimension mismatch,
/// nonpositive parameter, saturated sill, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: non-convergence, a PSD violation beyond
/// tolerance, a degenerate configuration.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace igpk
