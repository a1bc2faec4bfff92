#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace vibrosheet {

enum class ErrorCode {
  InvalidConfig,
  InvalidRange,
  NumericalBlowup,
  ParseError,
  AxisMismatch,
  GridMismatch,
  SliceMismatch,
  WindowTooShort,
  ZeroPower,
  ZeroVelocity,
  LengthMismatch,
  EmptySeries,
  DegenerateSeries,
  EmptyResult,
  AllFailed,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string msg)
      : std::runtime_error(std::move(msg)), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace vibrosheet
