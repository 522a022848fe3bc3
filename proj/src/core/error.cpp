#include "core/error.hpp"

namespace oampump {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Config: return "config";
    case ErrorCode::GapClosed: return "gap_closed";
    case ErrorCode::EdgeLeak: return "edge_leak";
    case ErrorCode::StepFailure: return "step_failure";
    case ErrorCode::Unstable: return "unstable";
    case ErrorCode::Unrepresentable: return "unrepresentable";
  }
  return "unknown";
}

}  // namespace oampump
