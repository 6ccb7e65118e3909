#include "amg/error.hpp"

namespace amg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::InvalidKind: return "InvalidKind";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DegenerateTrajectory: return "DegenerateTrajectory";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::ZeroWeightSum: return "ZeroWeightSum";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::StartBlocked: return "StartBlocked";
    case ErrorCode::GoalBlocked: return "GoalBlocked";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::AuthError: return "AuthError";
    case ErrorCode::NoMatchingObservation: return "NoMatchingObservation";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::VerifyMismatch: return "VerifyMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

Error Error::with_line(std::size_t line) const {
  Error e(code_, "line " + std::to_string(line) + ": " + detail_);
  e.line_ = line;
  e.station_ = station_;
  e.stage_ = stage_;
  return e;
}

Error Error::with_station(std::size_t station) const {
  Error e(code_, "station " + std::to_string(station) + ": " + detail_);
  e.line_ = line_;
  e.station_ = station;
  e.stage_ = stage_;
  return e;
}

Error Error::with_stage(const std::string& stage) const {
  Error e(code_, stage + ": " + detail_);
  e.line_ = line_;
  e.station_ = station_;
  e.stage_ = stage;
  return e;
}

}  // namespace amg
