#include "amg/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "amg/error.hpp"

namespace amg {

MockCrowdClassifier::MockCrowdClassifier(MockClassifierParams params) : params_(std::move(params)) {
  if (!(params_.detect_range >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "detect_range must be >= 0");
  }
  if (!(params_.fov_half_angle >= 0.0 && params_.fov_half_angle <= std::numbers::pi)) {
    throw Error(ErrorCode::InvalidArgument, "fov_half_angle must lie in [0, pi]");
  }
  if (!(params_.flip_probability >= 0.0 && params_.flip_probability <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "flip_probability must lie in [0, 1]");
  }
  for (const auto& d : params_.crowds) {
    if (!std::isfinite(d.center.x) || !std::isfinite(d.center.y) || !(d.radius >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "invalid crowd disc");
    }
  }
}

bool MockCrowdClassifier::sees_crowd(const Pose& pose) const {
  const double hx = std::cos(pose.heading);
  const double hy = std::sin(pose.heading);
  for (const auto& disc : params_.crowds) {
    const double dx = disc.center.x - pose.position.x;
    const double dy = disc.center.y - pose.position.y;
    const double dist = std::hypot(dx, dy);
    if (dist > params_.detect_range) continue;
    // A center coincident with the robot is treated as dead ahead.
    if (dist == 0.0) return true;
    const double cos_angle = std::clamp((dx * hx + dy * hy) / dist, -1.0, 1.0);
    if (std::acos(cos_angle) <= params_.fov_half_angle) return true;
  }
  return false;
}

double MockCrowdClassifier::flip_draw(const Pose& pose) const {
  const auto qx = static_cast<std::int64_t>(std::llround(pose.position.x * 1000.0));
  const auto qy = static_cast<std::int64_t>(std::llround(pose.position.y * 1000.0));
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffU); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  const auto ux = static_cast<std::uint64_t>(qx);
  const auto uy = static_cast<std::uint64_t>(qy);
  std::seed_seq seq{lo(params_.seed), hi(params_.seed), lo(ux), hi(ux), lo(uy), hi(uy)};
  std::mt19937_64 engine(seq);
  // Top 53 bits -> [0, 1); fixed across standard library implementations.
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

AbstractLabel MockCrowdClassifier::classify(const Pose& pose) const {
  bool crowd = sees_crowd(pose);
  if (params_.flip_probability > 0.0 && flip_draw(pose) < params_.flip_probability) {
    crowd = !crowd;
  }
  return crowd ? AbstractLabel::crowd : AbstractLabel::free;
}

AbstractLabel MockCrowdClassifier::classify(const Pose& pose, const ClassifyContext&) {
  return static_cast<const MockCrowdClassifier&>(*this).classify(pose);
}

ReplayClassifier::ReplayClassifier(std::vector<Observation> log, double match_radius)
    : log_(std::move(log)), match_radius_(match_radius) {
  if (!(match_radius_ >= 0.0)) throw Error(ErrorCode::InvalidArgument, "match_radius must be >= 0");
}

AbstractLabel ReplayClassifier::classify(WorldPoint position) const {
  const Observation* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& obs : log_) {
    const double d = std::hypot(obs.pose.position.x - position.x, obs.pose.position.y - position.y);
    if (d < best_dist || (d == best_dist && best && obs.timestamp < best->timestamp)) {
      best = &obs;
      best_dist = d;
    }
  }
  if (!best || best_dist > match_radius_) {
    throw Error(ErrorCode::NoMatchingObservation,
                "no recorded observation within " + std::to_string(match_radius_) + " m");
  }
  return best->label;
}

AbstractLabel ReplayClassifier::classify(const Pose& pose, const ClassifyContext&) {
  return classify(pose.position);
}

}  // namespace amg
