#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polykam {

// Stable, module-qualified error codes. The CLI prints code_name() verbatim.
enum class ErrorCode {
  GridMismatch,
  InvalidScalar,
  InvalidArgument,
  NotStabilized,
  NotFixed,
  LiftWindowTooSmall,
  MapSolveFailed,
  CohomologyMismatch,
  Unresolved,
  NoGap,
  ArcTooShort,
  StepTooSmall,
  NotBacktrackable,
  DiffusionStalled,
  Blocked,
  ConfigError,
};

std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace polykam
