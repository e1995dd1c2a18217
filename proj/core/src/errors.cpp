#include "focus/errors.hpp"

namespace focus {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kZeroOverlap: return "ZeroOverlap";
    case ErrorCode::kMissingAux: return "MissingAux";
    case ErrorCode::kRankTooLarge: return "RankTooLarge";
    case ErrorCode::kAllZeroSpectrum: return "AllZeroSpectrum";
    case ErrorCode::kSingularGram: return "SingularGram";
    case ErrorCode::kDegenerateUnit: return "DegenerateUnit";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kUnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::kUnstableDgp: return "UnstableDgp";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kNoPositiveActuals: return "NoPositiveActuals";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

ErrorCategory error_category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMissingAux:
    case ErrorCode::kRankTooLarge:
    case ErrorCode::kTooShort:
    case ErrorCode::kUnsupportedOrder:
    case ErrorCode::kUnstableDgp:
    case ErrorCode::kTooFewSamples:
      return ErrorCategory::kValidation;
    case ErrorCode::kIo:
      return ErrorCategory::kIo;
    default:
      return ErrorCategory::kNumerical;
  }
}

}  // namespace focus
