#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lineleak {

enum class ErrorCode {
  EmptyInput,
  ZeroSurvivors,
  InvalidSpec,
  ParseError,
  UnsupportedFormat,
  IoError,
  KTooLarge,
  TooFewValidEstimates,
  NoCandidates,
  TooFewCandidates,
  DegenerateWindow,
  ConfigError,
  MisalignedInputs,
  InvalidSamples,
  InvalidArgument,
};

const char* to_string(ErrorCode code);

/// Base exception for all library failures. The code identifies the failure
/// class so front ends (the CLI) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the file readers; carries the 1-based line number of the
/// offending input line.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace lineleak
