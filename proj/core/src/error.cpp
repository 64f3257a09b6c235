#include "polykam/error.hpp"

namespace polykam {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::GridMismatch: return "tropical.GridMismatch";
    case ErrorCode::InvalidScalar: return "tropical.InvalidScalar";
    case ErrorCode::InvalidArgument: return "core.InvalidArgument";
    case ErrorCode::NotStabilized: return "tropical.NotStabilized";
    case ErrorCode::NotFixed: return "tropical.NotFixed";
    case ErrorCode::LiftWindowTooSmall: return "models.LiftWindowTooSmall";
    case ErrorCode::MapSolveFailed: return "models.MapSolveFailed";
    case ErrorCode::CohomologyMismatch: return "pseudograph.CohomologyMismatch";
    case ErrorCode::Unresolved: return "weakkam.Unresolved";
    case ErrorCode::NoGap: return "mechanism.NoGap";
    case ErrorCode::ArcTooShort: return "mechanism.ArcTooShort";
    case ErrorCode::StepTooSmall: return "mechanism.StepTooSmall";
    case ErrorCode::NotBacktrackable: return "mechanism.NotBacktrackable";
    case ErrorCode::DiffusionStalled: return "mechanism.DiffusionStalled";
    case ErrorCode::Blocked: return "mechanism.Blocked";
    case ErrorCode::ConfigError: return "cli.ConfigError";
  }
  return "unknown";
}

}  // namespace polykam
