#pragma once

#include <stdexcept>
#include <string>

namespace chima {

// Base of every error the library raises. The CLI maps the subclasses onto
// its exit codes: ConfigError -> 1, DataError -> 2, NumericalError -> 3.
class Error : public std::runtime_error {
 public:
  Error(const std::string& module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(module) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

// Malformed configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violating a documented invariant (shape, finiteness, names).
class DataError : public Error {
 public:
  using Error::Error;
};

// Singular or ill-conditioned linear algebra.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace chima
