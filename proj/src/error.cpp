#include "vigil/error.hpp"

namespace vigil {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidBand: return "InvalidBand";
    case ErrorCode::UpsampleUnsupported: return "UpsampleUnsupported";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidRecording: return "InvalidRecording";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::RecordingTooShort: return "RecordingTooShort";
    case ErrorCode::SignalTooShort: return "SignalTooShort";
    case ErrorCode::DegenerateSignal: return "DegenerateSignal";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::AlignmentMismatch: return "AlignmentMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::SessionTooShort: return "SessionTooShort";
    case ErrorCode::UnevenSessions: return "UnevenSessions";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NonpositiveVariance: return "NonpositiveVariance";
    case ErrorCode::SingularPrecision: return "SingularPrecision";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidBand:
    case ErrorCode::UpsampleUnsupported:
    case ErrorCode::OutOfRange:
      return ErrorCategory::Config;
    case ErrorCode::ConvergenceFailure:
    case ErrorCode::NonConvergence:
    case ErrorCode::RankDeficient:
    case ErrorCode::NonpositiveVariance:
    case ErrorCode::SingularPrecision:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace vigil
