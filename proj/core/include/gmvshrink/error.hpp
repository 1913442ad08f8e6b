#pragma once

#include <stdexcept>
#include <string>

namespace gmvshrink {

/// Base of every error raised by the library. Each subclass maps onto one of
/// the CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
  virtual const char* kind() const noexcept { return "error"; }
};

/// Invalid configuration: bad parameters, regime violations, domain errors.
class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
  const char* kind() const noexcept override { return "config"; }
};

/// Malformed or inconsistent input data (non-finite values, wrong shapes).
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
  const char* kind() const noexcept override { return "data"; }
};

/// A quantity the computation divides by is numerically zero.
class DegenerateError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
  const char* kind() const noexcept override { return "degenerate"; }
};

}  // namespace gmvshrink
