#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vigil {

enum class ErrorCode {
  // configuration / usage
  InvalidConfig,
  InvalidBand,
  UpsampleUnsupported,
  OutOfRange,
  // data
  InvalidRecording,
  Io,
  Parse,
  LengthMismatch,
  RecordingTooShort,
  SignalTooShort,
  DegenerateSignal,
  ZeroVariance,
  EmptyInterval,
  EmptyInput,
  AlignmentMismatch,
  DimensionMismatch,
  DegenerateLabels,
  SessionTooShort,
  UnevenSessions,
  // numerical
  ConvergenceFailure,
  NonConvergence,
  RankDeficient,
  NonpositiveVariance,
  SingularPrecision,
};

enum class ErrorCategory { Config, Data, Numerical };

std::string_view to_string(ErrorCode code);
ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vigil
