#pragma once

#include <stdexcept>
#include <string>

namespace smest::core {

/**
 * @brief Base error carrying the CLI exit code.
 *
 * Exit codes: 0 success, 1 validation error, 2 configuration error, 3 I/O error.
 */
class Error : public std::runtime_error {
 public:
  Error(std::string message, int exit_code)
      : std::runtime_error(std::move(message)), exit_code_(exit_code) {}

  [[nodiscard]] int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

/// Malformed or inconsistent input data (exit code 1).
class ValidationError : public Error {
 public:
  explicit ValidationError(std::string message) : Error(std::move(message), 1) {}
};

/// Invalid or contradictory configuration (exit code 2).
class ConfigError : public Error {
 public:
  explicit ConfigError(std::string message) : Error(std::move(message), 2) {}
};

/// Filesystem failures (exit code 3).
class IoError : public Error {
 public:
  explicit IoError(std::string message) : Error(std::move(message), 3) {}
};

}  // namespace smest::core
