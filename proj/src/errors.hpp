#pragma once

#include <stdexcept>
#include <string>

namespace ptembed {

enum class ErrorCode {
  kInvalidArgument,
  kOutOfDomain,
  kCapExceeded,
  kNotHermitian,
  kNotPositive,
  kNoConvergence,
  kSingularQ,
  kBadLength,
  kBadSite,
  kBadIndex,
  kDimMismatch,
  kNotPTNormalized,
  kNotDensityMatrix,
  kNoBracket,
  kDegenerateFit,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kOutOfDomain: return "OutOfDomain";
    case ErrorCode::kCapExceeded: return "CapExceeded";
    case ErrorCode::kNotHermitian: return "NotHermitian";
    case ErrorCode::kNotPositive: return "NotPositive";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kSingularQ: return "SingularQ";
    case ErrorCode::kBadLength: return "BadLength";
    case ErrorCode::kBadSite: return "BadSite";
    case ErrorCode::kBadIndex: return "BadIndex";
    case ErrorCode::kDimMismatch: return "DimMismatch";
    case ErrorCode::kNotPTNormalized: return "NotPTNormalized";
    case ErrorCode::kNotDensityMatrix: return "NotDensityMatrix";
    case ErrorCode::kNoBracket: return "NoBracket";
    case ErrorCode::kDegenerateFit: return "DegenerateFit";
  }
  return "Unknown";
}

}  // namespace ptembed
