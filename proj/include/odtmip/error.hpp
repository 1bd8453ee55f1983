#pragma once

#include <stdexcept>
#include <string>

namespace odtmip {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  MissingColumn,
  SingleClass,
  NonFinite,
  DimensionMismatch,
  InfeasibleWarmStart,
  BackendUnavailable,
  BackendFailure,
  SolverFailure,
  Categorical,
};

const char* to_string(ErrorCode code);

/// Error raised by every library operation. The code is stable and is what
/// the tests and the CLI switch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace odtmip
