#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emma {

enum class ErrorCode {
  kMissingFile,
  kChecksumMismatch,
  kDuplicateId,
  kMalformedRecord,
  kOutOfRange,
  kShapeMismatch,
  kWindowTooShort,
  kEmptyInput,
  kNonFiniteInput,
  kNonPositiveDepth,
  kMatcherFailure,
  kDimensionMismatch,
  kZeroVector,
  kMissingQualityReport,
  kMissingScore,
  kEmptyStratum,
  kUnknownEvent,
  kTaskMismatch,
  kTooFewFrames,
  kInvalidConfig,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

// Every data/validation failure in the engine is reported through this type.
// `subject()` names the offending record id, file, or line so callers can
// point at the exact input that failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string subject, const std::string& detail = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

}  // namespace emma
