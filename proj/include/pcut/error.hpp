#pragma once

#include <stdexcept>
#include <string>

namespace pcut {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sizes of two arguments disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed or non-finite input data (files, matrices, features).
class InputError : public Error {
 public:
  using Error::Error;
};

// A numeric parameter is outside its domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// A structural constraint on the input is violated.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

// Invalid engine configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// An iterative or direct numerical method failed.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcut
