#pragma once

#include <stdexcept>
#include <string>

namespace uiground {

// Values double as process exit codes for the CLI.
enum class ErrorCategory : int {
  Config = 2,
  Input = 3,
  Client = 4,
  Invariant = 5,
};

const char* to_string(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorCategory::Input, what) {}
};

class ClientError : public Error {
 public:
  explicit ClientError(const std::string& what) : Error(ErrorCategory::Client, what) {}
};

class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what) : Error(ErrorCategory::Invariant, what) {}
};

// A point or box that does not fit its viewport.
class OutOfBoundsError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace uiground
