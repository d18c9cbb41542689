#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hyfl {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A LIBSVM line that cannot be tokenized or converted.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Structurally valid tokens that violate the format (e.g. non-increasing indices).
class FormatError : public ParseError {
 public:
  using ParseError::ParseError;
};

// A label that the configured label mapping does not cover.
class LabelError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Invalid user-supplied parameters or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A function was called with arguments outside its precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace hyfl
