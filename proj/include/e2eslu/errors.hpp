#pragma once

#include <stdexcept>
#include <string>

namespace e2eslu {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes do not satisfy an operation's shape rule.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite input where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameter or configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Dataset content violates a data invariant.
class DataError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Input sequence too short for the receptive field of a layer stack.
class LengthError : public Error {
 public:
  using Error::Error;
};

}  // namespace e2eslu
