#pragma once

#include <stdexcept>
#include <string>

namespace mspi {

// Base of every error raised by the pipeline. The CLI maps the concrete
// subclass to an exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration value; what() names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed, missing or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// A numerical procedure produced a non-finite or otherwise unusable value.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mspi
