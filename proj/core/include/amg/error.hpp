#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace amg {

enum class ErrorCode {
  OutOfBounds,
  ParseError,
  UnsupportedFormat,
  InvalidKind,
  IoError,
  DegenerateTrajectory,
  InvalidArgument,
  FactorizationFailure,
  DimensionMismatch,
  AlignmentError,
  ZeroWeightSum,
  NoPath,
  StartBlocked,
  GoalBlocked,
  TransportError,
  MalformedResponse,
  AuthError,
  NoMatchingObservation,
  SingularMatrix,
  ConfigError,
  VerifyMismatch,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library. `line` is set for parse failures
// that have a position; `station` for classifier failures raised while
// observing along a trajectory; `stage` names the scenario stage (and
// layer) that raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<std::size_t> line() const noexcept { return line_; }
  std::optional<std::size_t> station() const noexcept { return station_; }
  const std::string& stage() const noexcept { return stage_; }

  Error with_line(std::size_t line) const;
  Error with_station(std::size_t station) const;
  Error with_stage(const std::string& stage) const;

 private:
  ErrorCode code_;
  std::string detail_;
  std::optional<std::size_t> line_;
  std::optional<std::size_t> station_;
  std::string stage_;
};

}  // namespace amg
