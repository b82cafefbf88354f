#pragma once

#include <stdexcept>
#include <string>

namespace occupact {

// Base of every error raised by the library. Subclasses map to CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain (t <= 0, non-finite input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid distribution or process parameter.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Query outside a tabulated grid.
class RangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A computed quantity violated an internal consistency bound.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace occupact
