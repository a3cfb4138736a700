#pragma once

#include <stdexcept>
#include <string>

namespace tpp {

enum class ErrorCode {
  InvalidArgument,
  NonMonotonic,
  OutOfWindow,
  NegativeIntensity,
  DominatingRateOverflow,
  UnknownPreset,
  DegenerateData,
  RolloutOverflow,
  NonFiniteUpdate,
  NonConvergence,
  InsufficientData,
  Io,
  Parse,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::NonMonotonic: return "non_monotonic";
    case ErrorCode::OutOfWindow: return "out_of_window";
    case ErrorCode::NegativeIntensity: return "negative_intensity";
    case ErrorCode::DominatingRateOverflow: return "dominating_rate_overflow";
    case ErrorCode::UnknownPreset: return "unknown_preset";
    case ErrorCode::DegenerateData: return "degenerate_data";
    case ErrorCode::RolloutOverflow: return "rollout_overflow";
    case ErrorCode::NonFiniteUpdate: return "non_finite_update";
    case ErrorCode::NonConvergence: return "non_convergence";
    case ErrorCode::InsufficientData: return "insufficient_data";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace tpp
