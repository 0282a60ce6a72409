#pragma once

#include <stdexcept>
#include <string>

namespace ranklaw {

/// Base for every error raised by the toolkit. The message is prefixed with
/// the module that raised it ("fit: ...", "ingest: ...").
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (bad rows, unknown ids, missing values).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular systems, zero variance, degenerate inputs.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace ranklaw
