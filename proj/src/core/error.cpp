#include "emma/core/error.hpp"

namespace emma {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kWindowTooShort: return "WindowTooShort";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kMatcherFailure: return "MatcherFailure";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kMissingQualityReport: return "MissingQualityReport";
    case ErrorCode::kMissingScore: return "MissingScore";
    case ErrorCode::kEmptyStratum: return "EmptyStratum";
    case ErrorCode::kUnknownEvent: return "UnknownEvent";
    case ErrorCode::kTaskMismatch: return "TaskMismatch";
    case ErrorCode::kTooFewFrames: return "TooFewFrames";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorCode code, const std::string& subject, const std::string& detail) {
  std::string msg(error_code_name(code));
  msg += "(" + subject + ")";
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, std::string subject, const std::string& detail)
    : std::runtime_error(compose(code, subject, detail)), code_(code), subject_(std::move(subject)) {}

}  // namespace emma
