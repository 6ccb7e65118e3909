#include "amg/observation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

#include "amg/classifier.hpp"
#include "amg/error.hpp"
#include "amg/map_io.hpp"

namespace amg {

std::string_view to_string(AbstractLabel label) noexcept {
  return label == AbstractLabel::crowd ? "crowd" : "free";
}

std::optional<AbstractLabel> parse_label(std::string_view text) noexcept {
  if (text == "crowd") return AbstractLabel::crowd;
  if (text == "free") return AbstractLabel::free;
  return std::nullopt;
}

std::string_view to_string(ObservationSource source) noexcept {
  switch (source) {
    case ObservationSource::mock: return "mock";
    case ObservationSource::vlm: return "vlm";
    case ObservationSource::file: return "file";
  }
  return "mock";
}

std::optional<ObservationSource> parse_source(std::string_view text) noexcept {
  if (text == "mock") return ObservationSource::mock;
  if (text == "vlm") return ObservationSource::vlm;
  if (text == "file") return ObservationSource::file;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(std::vector<WorldPoint> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) {
    throw Error(ErrorCode::DegenerateTrajectory, "trajectory needs at least two waypoints");
  }
  cumulative_.reserve(waypoints_.size());
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < waypoints_.size(); ++i) {
    const auto& a = waypoints_[i - 1];
    const auto& b = waypoints_[i];
    if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(a.x) || !std::isfinite(a.y)) {
      throw Error(ErrorCode::DegenerateTrajectory, "non-finite waypoint");
    }
    const double d = std::hypot(b.x - a.x, b.y - a.y);
    if (d <= 1e-9) {
      throw Error(ErrorCode::DegenerateTrajectory,
                  "waypoints " + std::to_string(i - 1) + " and " + std::to_string(i) + " coincide");
    }
    cumulative_.push_back(cumulative_.back() + d);
  }
}

Pose Trajectory::pose_at(double s) const {
  s = std::clamp(s, 0.0, length());
  // First segment whose end lies strictly beyond s; the last segment otherwise.
  const auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end() - 1, s);
  const auto seg = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  const auto& a = waypoints_[seg];
  const auto& b = waypoints_[seg + 1];
  const double seg_len = cumulative_[seg + 1] - cumulative_[seg];
  const double t = (s - cumulative_[seg]) / seg_len;
  return {{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}, std::atan2(b.y - a.y, b.x - a.x)};
}

std::vector<Station> sample_stations(const Trajectory& trajectory, double interval) {
  if (!(interval > 0.0) || !std::isfinite(interval)) {
    throw Error(ErrorCode::InvalidArgument, "sampling interval must be positive");
  }
  const double total = trajectory.length();
  // Tolerate rounding in total/interval so that exact multiples get a station.
  const auto count = static_cast<std::size_t>(std::floor(total / interval + 1e-9)) + 1;
  std::vector<Station> stations;
  stations.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double s = std::min(static_cast<double>(k) * interval, total);
    stations.push_back({trajectory.pose_at(s), s});
  }
  return stations;
}

WorldPoint project_forward(const Pose& pose, double offset_distance) noexcept {
  if (offset_distance == 0.0) return pose.position;
  return {pose.position.x + offset_distance * std::cos(pose.heading),
          pose.position.y + offset_distance * std::sin(pose.heading)};
}

std::vector<Observation> observe_along(const Trajectory& trajectory, AbstractionSource& classifier,
                                       std::string_view layer_tag, const ObserveOptions& options) {
  if (!(options.speed > 0.0)) throw Error(ErrorCode::InvalidArgument, "speed must be positive");
  if (!std::isfinite(options.offset_distance)) {
    throw Error(ErrorCode::InvalidArgument, "offset distance must be finite");
  }
  if (options.start_time < 0.0) throw Error(ErrorCode::InvalidArgument, "negative start time");
  const auto stations = sample_stations(trajectory, options.interval);
  std::vector<Observation> out;
  out.reserve(stations.size());
  for (std::size_t i = 0; i < stations.size(); ++i) {
    const auto& st = stations[i];
    AbstractLabel label;
    try {
      label = classifier.classify(st.pose, ClassifyContext{i, layer_tag});
    } catch (const Error& e) {
      throw e.with_station(i);
    }
    out.push_back({options.start_time + st.arc_length / options.speed, st.pose,
                   project_forward(st.pose, options.offset_distance), label,
                   std::string(layer_tag), classifier.source()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Log format

std::string format_observation(const Observation& obs) {
  if (obs.layer_tag.find_first_of(",\n\r") != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "layer tag may not contain ',' or newlines");
  }
  std::string line;
  line += format_double(obs.timestamp);
  line += ',';
  line += format_double(obs.pose.position.x);
  line += ',';
  line += format_double(obs.pose.position.y);
  line += ',';
  line += format_double(obs.pose.heading);
  line += ',';
  line += format_double(obs.projected_position.x);
  line += ',';
  line += format_double(obs.projected_position.y);
  line += ',';
  line += to_string(obs.label);
  line += ',';
  line += obs.layer_tag;
  line += ',';
  line += to_string(obs.source);
  return line;
}

Observation parse_observation(std::string_view line) {
  std::array<std::string_view, 9> fields;
  std::size_t n = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (n == fields.size()) {
      throw Error(ErrorCode::ParseError, "too many fields");
    }
    fields[n++] = line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                     : comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (n != fields.size()) {
    throw Error(ErrorCode::ParseError, "expected 9 fields, got " + std::to_string(n));
  }
  static constexpr std::array<const char*, 6> names = {"timestamp", "x", "y", "heading",
                                                       "projected_x", "projected_y"};
  std::array<double, 6> nums{};
  for (std::size_t i = 0; i < nums.size(); ++i) {
    const auto v = parse_double(fields[i]);
    if (!v) throw Error(ErrorCode::ParseError, std::string("bad ") + names[i] + " '" + std::string(fields[i]) + "'");
    nums[i] = *v;
  }
  if (nums[0] < 0.0) throw Error(ErrorCode::ParseError, "negative timestamp");
  const auto label = parse_label(fields[6]);
  if (!label) throw Error(ErrorCode::ParseError, "bad label '" + std::string(fields[6]) + "'");
  if (fields[7].empty()) throw Error(ErrorCode::ParseError, "empty layer tag");
  const auto source = parse_source(fields[8]);
  if (!source) throw Error(ErrorCode::ParseError, "bad source '" + std::string(fields[8]) + "'");
  return {nums[0], {{nums[1], nums[2]}, nums[3]}, {nums[4], nums[5]}, *label,
          std::string(fields[7]), *source};
}

std::vector<Observation> log_parse(std::string_view text) {
  std::vector<Observation> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    const auto nl = text.find('\n', start);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    ++line_no;
    try {
      out.push_back(parse_observation(text.substr(start, end - start)));
    } catch (const Error& e) {
      throw e.with_line(line_no);
    }
    start = end + 1;
  }
  return out;
}

void log_write(const std::vector<Observation>& observations, const std::filesystem::path& path) {
  std::string text;
  for (const auto& obs : observations) {
    text += format_observation(obs);
    text += '\n';
  }
  write_text_file(path, text);
}

std::vector<Observation> log_read(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return log_parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace amg
