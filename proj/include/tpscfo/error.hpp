#pragma once

#include <stdexcept>
#include <string>

namespace tpscfo {

// Base class for every error raised by the library. The CLI maps
// ConfigError and UsageError to exit code 2, everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Violated precondition between components (size mismatch, overlap, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class UndefinedQualityError : public Error {
 public:
  using Error::Error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class UnsampleableError : public Error {
 public:
  using Error::Error;
};

class EmptyEvaluationError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace tpscfo
