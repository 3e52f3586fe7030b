#pragma once

#include <stdexcept>
#include <string>

namespace navstack {

// Error vocabulary shared across the stack. Contract violations throw
// NavError; routine task failures (a plan that finds no path, a controller
// with no feasible sample) travel as status codes on the owning server.
enum class ErrorCode {
  InvalidInput,
  OutOfBounds,
  MetaMismatch,
  PoseOutOfMap,
  MapParseError,
  ConfigError,
  ParseError,
  UnknownAction,
  IllegalTransition,
  TransitionFailed,
  BringupFailed,
  ServerUnavailable,
  RejectedGoal,
  BusyRejected,
};

const char* to_string(ErrorCode code);

class NavError : public std::runtime_error {
 public:
  NavError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace navstack
