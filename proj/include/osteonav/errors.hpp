#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osteonav {

/// Base of every error the library raises. `kind()` is a stable identifier
/// used in machine-readable CLI diagnostics.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define OSTEONAV_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    using Error::Error;                                              \
    const char* kind() const noexcept override { return #Name; }     \
  }

/// A precondition on the inputs was violated (bad vector, non-positive length...).
OSTEONAV_DEFINE_ERROR(InvalidArgument);
/// The data do not constrain every unknown (rank deficiency).
OSTEONAV_DEFINE_ERROR(DegenerateConfiguration);
/// Hand-eye data without enough relative rotation.
OSTEONAV_DEFINE_ERROR(InsufficientMotion);
/// Tip calibration samples disagree beyond the configured spread.
OSTEONAV_DEFINE_ERROR(InconsistentSamples);
OSTEONAV_DEFINE_ERROR(EmptyAfterGating);
OSTEONAV_DEFINE_ERROR(EmptyInput);
OSTEONAV_DEFINE_ERROR(EmptyProfile);
OSTEONAV_DEFINE_ERROR(InvalidPolicy);
/// File could not be read or written.
OSTEONAV_DEFINE_ERROR(IoError);

#undef OSTEONAV_DEFINE_ERROR

/// Malformed file content. `line()` is 1-based; 0 means the whole document.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(line == 0 ? reason : "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}
  const char* kind() const noexcept override { return "ParseError"; }
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class FrameError : public ParseError {
 public:
  using ParseError::ParseError;
  const char* kind() const noexcept override { return "FrameError"; }
};

class NonMonotoneTime : public ParseError {
 public:
  using ParseError::ParseError;
  const char* kind() const noexcept override { return "NonMonotoneTime"; }
};

}  // namespace osteonav
