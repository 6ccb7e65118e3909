#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "amg/classifier.hpp"
#include "amg/gpr.hpp"
#include "amg/layers.hpp"
#include "amg/map_io.hpp"
#include "amg/observation.hpp"
#include "amg/planner.hpp"

namespace amg {

// Axis-aligned world rectangle; cells whose center falls in [min, max) are
// covered.
struct WorldRect {
  WorldPoint min;
  WorldPoint max;
};

struct SyntheticMap {
  GridGeometry geometry;
  std::vector<WorldRect> obstacles;
  std::vector<WorldRect> unknown;
};

GridMap rasterize(const SyntheticMap& spec);

struct MapSource {
  std::optional<SyntheticMap> synthetic;
  std::optional<std::filesystem::path> pgm;
  std::optional<MapMetadata> metadata;
};

enum class ClassifierMode { mock, replay, vlm };

struct ClassifierSpec {
  ClassifierMode mode = ClassifierMode::mock;
  double detect_range = 8.0;
  double fov_half_angle = std::numbers::pi / 3.0;
  double flip_probability = 0.0;
  std::optional<std::uint64_t> seed;
  double match_radius = 0.5;
  std::string model = "gpt-4o-mini";
  std::optional<std::filesystem::path> prompt_file;
  double timeout_s = 30.0;
  int max_retries = 2;
};

struct TrajectorySpec {
  std::string tag;
  std::vector<WorldPoint> waypoints;
  ObserveOptions observe;
  std::vector<CrowdDisc> crowds;                   // mock ground truth for this trial
  std::optional<std::filesystem::path> replay_log;  // replay mode
  std::optional<std::filesystem::path> images;      // vlm mode: station_NNNN.jpg frames
};

using WeightMap = std::map<std::string, double>;

inline constexpr const char* kGeometricTag = "geometric";

struct ScenarioConfig {
  std::string name = "scenario";
  MapSource map;
  int unknown_cost = kDefaultUnknownCost;
  ClassifierSpec classifier;
  std::vector<TrajectorySpec> trajectories;
  Hyperparameters gpr;
  double kappa = 0.0;
  WeightMap weights;
  std::vector<WeightMap> weight_sets;
  bool lethal_enabled = true;
  int lethal_threshold = kLethalCost;
  PlannerConfig planner;
  WorldPoint start;
  WorldPoint goal;
  std::filesystem::path output_dir = "out";
};

// Parses the JSON scenario schema documented in README.md. Relative input
// paths resolve against `base_dir`. Unknown keys are rejected. Throws
// ConfigError.
ScenarioConfig parse_scenario(std::string_view json_text,
                              const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario(const std::filesystem::path& path);
void validate(const ScenarioConfig& config);

// "tag=w,tag=w" as accepted by --weights.
WeightMap parse_weights(std::string_view text);
std::string format_weights(const WeightMap& weights);

struct RunOptions {
  bool live_vlm = false;
  std::optional<std::uint64_t> seed;  // overrides classifier.seed
  bool write_artifacts = true;
};

struct AbstractionLayerState {
  std::string tag;
  std::vector<Observation> observations;
  std::optional<GprModel> model;
  std::optional<PredictedGrids> prediction;
  std::optional<CostLayer> cost;
};

struct StageTiming {
  std::string stage;
  std::string layer;
  double seconds = 0.0;
};

// Everything up to (not including) fusion; shared across weightings.
struct PreparedScenario {
  ScenarioConfig config;
  GridMap occupancy;
  CostLayer geometric;
  std::vector<AbstractionLayerState> layers;
  GridIndex start;
  GridIndex goal;
  std::vector<StageTiming> timings;
};

struct LayerSummary {
  std::string tag;
  std::size_t observations = 0;
  std::size_t crowd = 0;
  std::size_t free = 0;
};

struct GridStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

struct ScenarioReport {
  std::string name;
  WeightMap weights;
  std::vector<LayerSummary> layers;
  GridStats fused_stats;
  Path path;
  // Sum over path cells of each layer's cost (geometric and abstraction).
  std::map<std::string, double> exposure;
  std::vector<StageTiming> timings;
  std::optional<GridMap> fused;
};

// Classifier used for one trajectory, built from the scenario spec.
std::unique_ptr<AbstractionSource> make_classifier(const ScenarioConfig& config,
                                                   const TrajectorySpec& trajectory,
                                                   const RunOptions& options);

GridMap build_occupancy(const ScenarioConfig& config);

// Map, observation and GPR stages.
PreparedScenario prepare(const ScenarioConfig& config, const RunOptions& options = {});
// Fusion and planning for one weighting. Throws NoPath etc.
ScenarioReport evaluate(const PreparedScenario& prepared, const WeightMap& weights);

// Full pipeline with config.weights; writes artifacts into config.output_dir.
ScenarioReport run(const ScenarioConfig& config, const RunOptions& options = {});
// One report per weight set over the same observations and GPR fits; each
// weighting's artifacts go to a subdirectory of output_dir.
std::vector<ScenarioReport> run_temporal(const ScenarioConfig& config, const RunOptions& options = {});

// Writes layer artifacts (observation logs, rasters, cost PGMs).
void write_layer_artifacts(const PreparedScenario& prepared, const std::filesystem::path& dir);
// Writes fused.pgm, path.txt, report.json and the renders.
void write_result_artifacts(const PreparedScenario& prepared, const ScenarioReport& report,
                            const std::filesystem::path& dir);

// Deterministic JSON (no timings).
std::string report_json(const ScenarioReport& report);
std::string weights_dir_name(const WeightMap& weights, const std::vector<std::string>& order);

}  // namespace amg
