#pragma once

#include <stdexcept>
#include <string>

namespace idca {

/// Base error; carries the name of the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Bad input data (files, rows, values).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or configuration; raised before any computation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The detection loop hit its cycle cap with immature cells left.
class CycleCapError : public Error {
 public:
  using Error::Error;
};

}  // namespace idca
