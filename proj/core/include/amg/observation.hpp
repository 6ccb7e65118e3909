#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amg/grid.hpp"

namespace amg {

enum class AbstractLabel { free, crowd };

// Regression target for a label: crowd -> 1.0, free -> 0.0.
constexpr double encode(AbstractLabel label) noexcept {
  return label == AbstractLabel::crowd ? 1.0 : 0.0;
}
std::string_view to_string(AbstractLabel label) noexcept;
std::optional<AbstractLabel> parse_label(std::string_view text) noexcept;

enum class ObservationSource { mock, vlm, file };
std::string_view to_string(ObservationSource source) noexcept;
std::optional<ObservationSource> parse_source(std::string_view text) noexcept;

struct Pose {
  WorldPoint position;
  double heading = 0.0;  // radians, counter-clockwise from +x

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Observation {
  double timestamp = 0.0;  // seconds since scenario start
  Pose pose;
  WorldPoint projected_position;
  AbstractLabel label = AbstractLabel::free;
  std::string layer_tag;
  ObservationSource source = ObservationSource::mock;

  friend bool operator==(const Observation&, const Observation&) = default;
};

// Polyline the robot drives along. Headings are those of the segments.
class Trajectory {
 public:
  // Throws DegenerateTrajectory for fewer than two waypoints or coincident
  // consecutive waypoints.
  explicit Trajectory(std::vector<WorldPoint> waypoints);

  const std::vector<WorldPoint>& waypoints() const noexcept { return waypoints_; }
  double length() const noexcept { return cumulative_.back(); }
  // Pose at arc length `s` in [0, length()]; at an interior vertex the
  // outgoing segment's heading is used.
  Pose pose_at(double s) const;

 private:
  std::vector<WorldPoint> waypoints_;
  std::vector<double> cumulative_;
};

struct Station {
  Pose pose;
  double arc_length = 0.0;
};

// Poses at arc lengths 0, interval, 2*interval, ... <= length.
std::vector<Station> sample_stations(const Trajectory& trajectory, double interval);

WorldPoint project_forward(const Pose& pose, double offset_distance) noexcept;

class AbstractionSource;

struct ObserveOptions {
  double interval = 3.0;
  double offset_distance = 0.0;
  // Timestamps are arc_length / speed + start_time.
  double speed = 1.0;
  double start_time = 0.0;
};

// Queries `classifier` once per station, in station order. Classifier
// errors are re-raised with the station index attached.
std::vector<Observation> observe_along(const Trajectory& trajectory, AbstractionSource& classifier,
                                       std::string_view layer_tag, const ObserveOptions& options);

// Observation log: one comma-separated record per line,
//   timestamp,x,y,heading,projected_x,projected_y,label,layer_tag,source
std::string format_observation(const Observation& obs);
Observation parse_observation(std::string_view line);  // throws ParseError
void log_write(const std::vector<Observation>& observations, const std::filesystem::path& path);
std::vector<Observation> log_read(const std::filesystem::path& path);
std::vector<Observation> log_parse(std::string_view text);

}  // namespace amg
