#pragma once

#include <stdexcept>
#include <string>

namespace betfolio {

// Machine-readable failure categories. The CLI maps these onto exit codes and
// the single-line "error: <Code>: <message>" stderr format, so the names are
// part of the output contract (see docs/formats.md).
enum class ErrorCode {
  InvalidInput,
  DimensionMismatch,
  DomainError,
  Infeasible,
  NoPositiveExcess,
  MissingColumn,
  BadField,
  BadOdds,
  BadProbabilitySum,
  BadResultCode,
  DuplicateMatch,
  MissingResult,
  BadArgument,
  IoError,
  Internal,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::NoPositiveExcess: return "NoPositiveExcess";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::BadField: return "BadField";
    case ErrorCode::BadOdds: return "BadOdds";
    case ErrorCode::BadProbabilitySum: return "BadProbabilitySum";
    case ErrorCode::BadResultCode: return "BadResultCode";
    case ErrorCode::DuplicateMatch: return "DuplicateMatch";
    case ErrorCode::MissingResult: return "MissingResult";
    case ErrorCode::BadArgument: return "BadArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace betfolio
