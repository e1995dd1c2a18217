#ifndef FOCUS_ERRORS_HPP_
#define FOCUS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace focus {

enum class ErrorCode {
  kInvalidArgument,
  kZeroOverlap,
  kMissingAux,
  kRankTooLarge,
  kAllZeroSpectrum,
  kSingularGram,
  kDegenerateUnit,
  kSingularSystem,
  kTooShort,
  kUnsupportedOrder,
  kUnstableDgp,
  kTooFewSamples,
  kNoPositiveActuals,
  kIo,
};

// Broad grouping used by the CLI to pick an exit code.
enum class ErrorCategory { kValidation, kNumerical, kIo };

const char* error_code_name(ErrorCode code);
ErrorCategory error_category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorCategory category() const { return error_category(code_); }

 private:
  ErrorCode code_;
};

}  // namespace focus

#endif  // FOCUS_ERRORS_HPP_
