#include "amg/scenario.hpp"

#include <algorithm>
#include <fstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "test_util.hpp"

namespace amg {
namespace {

using nlohmann::json;
using testing::code_of;
using testing::scratch_dir;
using testing::source_path;

// Small open field with one trajectory; mutated per test.
json small_config() {
  return json::parse(R"({
    "name": "small",
    "map": {"synthetic": {"width": 40, "height": 20, "resolution": 0.5, "origin": [0, 0],
                          "obstacles": [{"min": [9.5, 0], "max": [10.5, 7]}]}},
    "trajectories": [{"tag": "trial1", "waypoints": [[1, 5], [19, 5]],
                      "crowds": [{"center": [12, 5], "radius": 1}]}],
    "start": [1, 5],
    "goal": [19, 5],
    "output_dir": "unused"
  })");
}

ScenarioConfig parse(const json& j) { return parse_scenario(j.dump()); }

TEST(ScenarioConfig, ShippedScenariosParse) {
  for (const char* name : {"scenarios/two_corridor.json", "scenarios/temporal.json"}) {
    const auto c = load_scenario(source_path(name));
    EXPECT_EQ(c.map.synthetic->geometry.width, 200);
    EXPECT_EQ(c.map.synthetic->geometry.resolution, 0.25);
    EXPECT_FALSE(c.trajectories.empty());
  }
}

TEST(ScenarioConfig, DefaultsAndWeights) {
  const auto c = parse(small_config());
  EXPECT_EQ(c.weights.at("geometric"), 1.0);
  EXPECT_EQ(c.weights.at("trial1"), 1.0);
  EXPECT_EQ(c.trajectories[0].observe.interval, 3.0);
  EXPECT_EQ(c.gpr.lengthscale, 3.0);
  EXPECT_EQ(c.planner.traversal_gamma, 10.0);
  EXPECT_TRUE(c.lethal_enabled);
}

TEST(ScenarioConfig, RejectsUnknownKeysAtEveryLevel) {
  const std::vector<json::json_pointer> where = {json::json_pointer(""), json::json_pointer("/map"),
                                                 json::json_pointer("/map/synthetic"),
                                                 json::json_pointer("/trajectories/0"),
                                                 json::json_pointer("/trajectories/0/crowds/0")};
  for (const auto& ptr : where) {
    auto j = small_config();
    j[ptr]["bogus"] = 1;
    EXPECT_EQ(code_of([&] { parse(j); }), ErrorCode::ConfigError) << ptr.to_string();
  }
  auto j = small_config();
  j["gpr"] = {{"lengthscale", 2.0}, {"sigma", 1}};
  EXPECT_EQ(code_of([&] { parse(j); }), ErrorCode::ConfigError);
}

TEST(ScenarioConfig, SeedRequiredWithFlipNoise) {
  auto j = small_config();
  j["classifier"] = {{"flip_probability", 0.1}};
  EXPECT_EQ(code_of([&] { parse(j); }), ErrorCode::ConfigError);
  j["classifier"]["seed"] = 7;
  EXPECT_FALSE(code_of([&] { parse(j); }));
}

TEST(ScenarioConfig, TagRules) {
  auto j = small_config();
  j["trajectories"].push_back(j["trajectories"][0]);
  EXPECT_EQ(code_of([&] { parse(j); }), ErrorCode::ConfigError);
  j = small_config();
  j["trajectories"][0]["tag"] = "geometric";
  EXPECT_EQ(code_of([&] { parse(j); }), ErrorCode::ConfigError);
  j["trajectories"][0]["tag"] = "has,comma";
  EXPECT_EQ(code_of([&] { parse(j); }), ErrorCode::ConfigError);
}

TEST(ScenarioConfig, WeightKeysMustExist) {
  auto j = small_config();
  j["weights"] = {{"geometric", 1}, {"trial9", 1}};
  EXPECT_EQ(code_of([&] { parse(j); }), ErrorCode::ConfigError);
  j["weights"] = {{"geometric", 0}, {"trial1", 0}};
  EXPECT_EQ(code_of([&] { parse(j); }), ErrorCode::ConfigError);
  j["weights"] = {{"geometric", 1}};
  EXPECT_FALSE(code_of([&] { parse(j); }));
}

TEST(ScenarioConfig, StartGoalInsideMap) {
  auto j = small_config();
  j["goal"] = {25, 5};
  EXPECT_EQ(code_of([&] { parse(j); }), ErrorCode::ConfigError);
}

TEST(ScenarioConfig, MalformedJson) {
  EXPECT_EQ(code_of([] { parse_scenario("{"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_scenario("[]"); }), ErrorCode::ConfigError);
}

TEST(ScenarioConfig, WeightStrings) {
  const auto w = parse_weights("geometric=9,trial1=1");
  EXPECT_EQ(w.at("geometric"), 9.0);
  EXPECT_EQ(format_weights(w), "geometric=9,trial1=1");
  EXPECT_EQ(code_of([] { parse_weights("geometric"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { parse_weights("a=-1"); }), ErrorCode::ConfigError);
  EXPECT_EQ(weights_dir_name({{"geometric", 4}, {"trial1", 4}, {"trial2", 1}}, {"geometric", "trial1", "trial2"}),
            "weights_4_4_1");
}

TEST(ScenarioRun, NoCrowdBaselineMatchesGeometricOnly) {
  auto j = small_config();
  j["trajectories"][0]["crowds"] = json::array();
  const auto c = parse(j);
  const auto prep = prepare(c);
  const auto with = evaluate(prep, {{"geometric", 1}, {"trial1", 1}});
  const auto geo = evaluate(prep, {{"geometric", 1}});
  EXPECT_EQ(with.path.cells, geo.path.cells);
  EXPECT_EQ(with.exposure.at("trial1"), 0.0);
}

TEST(ScenarioRun, ReportInvariants) {
  const auto c = parse(small_config());
  RunOptions opt;
  opt.write_artifacts = false;
  const auto r = run(c, opt);
  ASSERT_EQ(r.layers.size(), 1u);
  EXPECT_EQ(r.layers[0].crowd + r.layers[0].free, r.layers[0].observations);
  EXPECT_GT(r.layers[0].crowd, 0u);
  for (const auto& [tag, e] : r.exposure) EXPECT_GE(e, 0.0) << tag;
  std::vector<std::string> stages;
  for (const auto& t : r.timings) stages.push_back(t.stage + ":" + t.layer);
  EXPECT_EQ(stages, (std::vector<std::string>{"map:geometric", "observe:trial1", "fit:trial1", "predict:trial1",
                                              "cost:trial1", "fuse:", "plan:"}));
  ASSERT_TRUE(r.fused.has_value());
  EXPECT_EQ(r.path.cells.front(), r.fused->world_to_grid({1, 5}));
}

TEST(ScenarioRun, ZeroAbstractionWeightIsGeometricOnly) {
  const auto c = load_scenario(source_path("scenarios/temporal.json"));
  const auto prep = prepare(c);
  const auto degenerate = evaluate(prep, {{"geometric", 1}, {"trial1", 0}, {"trial2", 0}});
  const auto geo = evaluate(prep, {{"geometric", 1}});
  EXPECT_EQ(degenerate.path.cells, geo.path.cells);
}

TEST(ScenarioRun, VlmNeedsOptIn) {
  auto j = small_config();
  j["classifier"] = {{"type", "vlm"}};
  j["trajectories"][0]["images"] = "frames";
  const auto c = parse(j);
  EXPECT_EQ(code_of([&] { prepare(c); }), ErrorCode::ConfigError);
}

TEST(ScenarioRun, ReplayReproducesMockLabels) {
  const auto dir = scratch_dir("replay");
  auto c = parse(small_config());
  const auto first = prepare(c);
  log_write(first.layers[0].observations, dir / "trial1.csv");

  auto j = small_config();
  j["classifier"] = {{"type", "replay"}};
  j["trajectories"][0]["replay_log"] = "trial1.csv";
  const auto replay = parse_scenario(j.dump(), dir);
  const auto second = prepare(replay);
  ASSERT_EQ(second.layers[0].observations.size(), first.layers[0].observations.size());
  for (std::size_t i = 0; i < first.layers[0].observations.size(); ++i) {
    EXPECT_EQ(second.layers[0].observations[i].label, first.layers[0].observations[i].label);
    EXPECT_EQ(second.layers[0].observations[i].source, ObservationSource::file);
  }
}

TEST(ScenarioRun, StageTaggedErrors) {
  const auto dir = scratch_dir("replay");
  write_text_file(dir / "empty.csv", "");
  auto j = small_config();
  j["classifier"] = {{"type", "replay"}};
  j["trajectories"][0]["replay_log"] = "empty.csv";
  const auto c = parse_scenario(j.dump(), dir);
  try {
    prepare(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoMatchingObservation);
    EXPECT_EQ(e.stage(), "observe[trial1]");
    EXPECT_EQ(e.station(), 0u);
  }
}

TEST(ScenarioRun, PgmMapSource) {
  const auto dir = scratch_dir("pgm");
  PgmImage img{20, 10, std::vector<std::uint8_t>(200, 255)};
  for (int r = 0; r < 10; ++r) img.pixels[static_cast<std::size_t>(r * 20 + 10)] = 0;
  img.pixels[10] = 255;  // gap in the top row
  write_file_bytes(dir / "m.pgm", encode_pgm(img));
  write_text_file(dir / "m.json", R"({"image": "m.pgm", "resolution": 1.0, "origin": [0, 0]})");
  auto j = small_config();
  j["map"] = {{"metadata", "m.json"}};
  j["trajectories"][0]["waypoints"] = {{1, 2}, {19, 2}};
  j["start"] = {1.5, 0.5};
  j["goal"] = {18.5, 0.5};
  const auto c = parse_scenario(j.dump(), dir);
  const auto r = evaluate(prepare(c), {{"geometric", 1}});
  // The only way across is the gap in the top map row (row 9).
  EXPECT_TRUE(std::any_of(r.path.cells.begin(), r.path.cells.end(),
                          [](GridIndex i) { return i == GridIndex{9, 10}; }));
}

TEST(ScenarioRun, ArtifactsAreDeterministic) {
  const auto dir = scratch_dir("det");
  auto c = parse(small_config());
  c.classifier.flip_probability = 0.2;
  c.classifier.seed = 5;
  c.output_dir = dir / "a";
  run(c);
  c.output_dir = dir / "b";
  run(c);
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(dir / "a")) {
    const auto name = e.path().filename().string();
    names.push_back(name);
    EXPECT_EQ(read_file_bytes(dir / "a" / name), read_file_bytes(dir / "b" / name)) << name;
  }
  for (const char* expected : {"geometric.pgm", "trial1_observations.csv", "trial1_mean.raster",
                               "trial1_variance.raster", "trial1_cost.pgm", "fused.pgm", "path.txt", "report.json",
                               "overlay.png", "trial1_mean.pgm", "trial1_variance.pgm"}) {
    EXPECT_NE(std::find(names.begin(), names.end(), expected), names.end()) << expected;
  }
}

}  // namespace
}  // namespace amg
