#include "lineleak/error.hpp"

namespace lineleak {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ZeroSurvivors: return "ZeroSurvivors";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::TooFewValidEstimates: return "TooFewValidEstimates";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::TooFewCandidates: return "TooFewCandidates";
    case ErrorCode::DegenerateWindow: return "DegenerateWindow";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MisalignedInputs: return "MisalignedInputs";
    case ErrorCode::InvalidSamples: return "InvalidSamples";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : Error(ErrorCode::ParseError, path + ":" + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace lineleak
