#pragma once

#include <stdexcept>
#include <string>

namespace oampump {

enum class ErrorCode {
  InvalidArgument,
  Config,
  GapClosed,
  EdgeLeak,
  StepFailure,
  Unstable,
  Unrepresentable,
};

/// Name used in machine-readable error objects ("gap_closed", ...).
const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, const std::string& what,
                    ErrorCode code = ErrorCode::InvalidArgument) {
  if (!cond) throw Error(code, what);
}

}  // namespace oampump
