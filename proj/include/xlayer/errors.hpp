#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace xlayer {

/// Base class for all failures the pipeline reports on bad inputs.
/// The CLI maps every subclass to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (XML or JSON). Carries the line when known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message,
                      std::optional<long> line = std::nullopt)
      : Error(line ? message + " (line " + std::to_string(*line) + ")"
                   : message),
        line_(line) {}

  std::optional<long> line() const { return line_; }

 private:
  std::optional<long> line_;
};

/// Well-formed input that violates a model invariant (dangling reference,
/// duplicate id, overlapping boundary, ...). Messages name the offending id.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Mutually exclusive constraints over the same task pair, or the same
/// constraint id declared twice with different content.
class ContradictionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Bad run configuration (unknown pool name, unknown task selection, missing
/// file, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace xlayer
