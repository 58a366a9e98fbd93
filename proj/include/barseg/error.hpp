#pragma once

#include <stdexcept>
#include <string>

namespace barseg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unsupported input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition on an argument.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The autosimilarity carries no usable similarity structure (c_k8_max <= 0).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Wraps an error raised inside one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace barseg
