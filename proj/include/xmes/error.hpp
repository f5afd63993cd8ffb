#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace xmes {

enum class ErrorCode {
  InvalidInput,
  InvalidK,
  InvalidTau,
  InvalidAlpha,
  InvalidLag,
  DegenerateTail,
  DegenerateThreshold,
  HeavyTailUnbounded,
  MissingSecondOrder,
  InvalidModel,
  InsufficientExceedances,
  MissingTruth,
  GridMismatch,
  IoError,
  InvalidPrices,
  InvalidHorizon,
};

constexpr std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::InvalidTau: return "InvalidTau";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::InvalidLag: return "InvalidLag";
    case ErrorCode::DegenerateTail: return "DegenerateTail";
    case ErrorCode::DegenerateThreshold: return "DegenerateThreshold";
    case ErrorCode::HeavyTailUnbounded: return "HeavyTailUnbounded";
    case ErrorCode::MissingSecondOrder: return "MissingSecondOrder";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InsufficientExceedances: return "InsufficientExceedances";
    case ErrorCode::MissingTruth: return "MissingTruth";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidPrices: return "InvalidPrices";
    case ErrorCode::InvalidHorizon: return "InvalidHorizon";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// CLI maps them to exit status 1 and prints the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace xmes
