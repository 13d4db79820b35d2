#pragma once

#include <stdexcept>
#include <string>

namespace tvef {

// Error taxonomy shared by the whole library. The numeric code doubles as the
// process exit code and as the status returned across the C boundary.
class Error : public std::runtime_error {
 public:
  Error(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

// Bad option, bad config file, unknown column, malformed flag value.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(2, what) {}
};

// Malformed or internally inconsistent input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(3, what) {}
};

// Numerical failure: singular system, unit root where stationarity is required.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(4, what) {}
};

}  // namespace tvef
