#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace srl {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A precondition on an argument value was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Malformed input text; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input whose content breaks a structural assumption
// (missing senses, cyclic head structure, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Gold and predicted corpora that cannot be compared item by item.
class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  enum class Kind { kIo, kVersion, kManifest, kShape, kTruncated, kConfig };

  CheckpointError(Kind kind, const std::string& message)
      : Error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace srl
