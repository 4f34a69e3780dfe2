#pragma once

#include <stdexcept>
#include <string>

namespace mmfc {

// Base of every error thrown by the library. The CLI maps the subclasses onto
// its exit-code contract (config 2, dependency 3, data integrity 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DependencyError : public Error {
 public:
  using Error::Error;
};

// Corrupt, truncated or mismatched coded data.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmfc
