#pragma once

#include <stdexcept>
#include <string>

namespace evotrack {

/// Base class for every error raised by the library. Carries the name of the
/// module that raised it and, optionally, a remedy hint for the operator.
class Error : public std::runtime_error {
public:
  Error(std::string module, const std::string& message, std::string hint = {})
      : std::runtime_error(module + ": " + message),
        module_(std::move(module)),
        hint_(std::move(hint)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& hint() const noexcept { return hint_; }

private:
  std::string module_;
  std::string hint_;
};

/// Caller passed arguments that violate a precondition (dimension mismatch,
/// symbol out of range, invalid parameters).
class InputError : public Error {
public:
  using Error::Error;
};

/// A single opcode file could not be turned into a sample.
class MalformedSampleError : public Error {
public:
  using Error::Error;
};

/// The data as a whole cannot support the requested analysis.
class DataError : public Error {
public:
  using Error::Error;
};

/// A run configuration is invalid or inconsistent.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace evotrack
