#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace plchaos {

enum class ErrorCode {
  InvalidArgument,
  NotInR1,
  StepLimit,
  NonFinite,
  LeftSection,
  SectionDrift,
  NoConvergence,
  SingularJacobian,
  NotApplicable,
  StartNotConverged,
  StepUnderflow,
  TooFewEvents,
  NotASaddle,
  ComplexUnstableMultiplier,
  ZStable,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::NotInR1: return "NOT_IN_R1";
    case ErrorCode::StepLimit: return "STEP_LIMIT";
    case ErrorCode::NonFinite: return "NONFINITE";
    case ErrorCode::LeftSection: return "LEFT_SECTION";
    case ErrorCode::SectionDrift: return "SECTION_DRIFT";
    case ErrorCode::NoConvergence: return "NO_CONVERGENCE";
    case ErrorCode::SingularJacobian: return "SINGULAR_JACOBIAN";
    case ErrorCode::NotApplicable: return "NOT_APPLICABLE";
    case ErrorCode::StartNotConverged: return "START_NOT_CONVERGED";
    case ErrorCode::StepUnderflow: return "STEP_UNDERFLOW";
    case ErrorCode::TooFewEvents: return "TOO_FEW_EVENTS";
    case ErrorCode::NotASaddle: return "NOT_A_SADDLE";
    case ErrorCode::ComplexUnstableMultiplier: return "COMPLEX_UNSTABLE_MULTIPLIER";
    case ErrorCode::ZStable: return "Z_STABLE";
  }
  return "UNKNOWN";
}

/// Domain failure raised by every plchaos operation. The code is stable and
/// machine-checkable; the message carries context for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace plchaos
