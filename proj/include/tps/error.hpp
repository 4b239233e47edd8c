#pragma once

#include <stdexcept>
#include <string>

namespace tps {

/// Category of a failure; the CLI maps these onto process exit codes.
enum class ErrorKind {
  invalid_input,  // violated precondition or invariant
  config,         // malformed or inconsistent configuration
  io,             // file system failure
  numerical,      // solver breakdown, non-finite values, degeneracy
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error(ErrorKind::invalid_input, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Raised when a loss or derivative evaluates to NaN/Inf; names the offending term.
class NonFiniteError : public NumericalError {
 public:
  NonFiniteError(const std::string& term, const std::string& what) : NumericalError(what), term_(term) {}
  const std::string& term() const noexcept { return term_; }

 private:
  std::string term_;
};

}  // namespace tps
