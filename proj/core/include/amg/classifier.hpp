#pragma once

#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include "amg/observation.hpp"

namespace amg {

struct ClassifyContext {
  std::size_t station = 0;
  std::string_view layer_tag;
};

// Source of binary abstraction labels. Implementations return crowd/free or
// throw amg::Error; they never guess.
class AbstractionSource {
 public:
  virtual ~AbstractionSource() = default;
  virtual AbstractLabel classify(const Pose& pose, const ClassifyContext& context) = 0;
  virtual ObservationSource source() const noexcept = 0;
};

struct CrowdDisc {
  WorldPoint center;
  double radius = 1.0;
};

struct MockClassifierParams {
  std::vector<CrowdDisc> crowds;
  double detect_range = 8.0;
  double fov_half_angle = std::numbers::pi / 3.0;
  double flip_probability = 0.0;
  std::uint64_t seed = 0;
};

// Forward camera stand-in: reports crowd when a disc center lies within
// `detect_range` and inside the +/- fov_half_angle cone around the heading.
// With flip_probability > 0 the label is flipped by a draw keyed on
// (seed, pose quantized to 1 mm), so the noise is reproducible.
class MockCrowdClassifier final : public AbstractionSource {
 public:
  explicit MockCrowdClassifier(MockClassifierParams params);

  AbstractLabel classify(const Pose& pose, const ClassifyContext& context) override;
  ObservationSource source() const noexcept override { return ObservationSource::mock; }

  AbstractLabel classify(const Pose& pose) const;
  bool sees_crowd(const Pose& pose) const;
  // Uniform draw in [0,1) for the flip decision at this pose.
  double flip_draw(const Pose& pose) const;

  const MockClassifierParams& params() const noexcept { return params_; }

 private:
  MockClassifierParams params_;
};

// Answers from a recorded observation log: nearest record (by robot
// position) within match_radius, earliest timestamp on ties.
class ReplayClassifier final : public AbstractionSource {
 public:
  explicit ReplayClassifier(std::vector<Observation> log, double match_radius = 0.5);

  AbstractLabel classify(const Pose& pose, const ClassifyContext& context) override;
  ObservationSource source() const noexcept override { return ObservationSource::file; }

  AbstractLabel classify(WorldPoint position) const;

 private:
  std::vector<Observation> log_;
  double match_radius_;
};

}  // namespace amg
