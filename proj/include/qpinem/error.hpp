#pragma once

#include <stdexcept>
#include <string>

namespace qpinem {

// Invalid parameters or configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Truncation leakage, ill-posed inversion, overflow. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File read/write/parse failures. Maps to CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qpinem
