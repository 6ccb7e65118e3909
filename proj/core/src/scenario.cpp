#include "amg/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <regex>
#include <set>
#include <type_traits>

#include <json.hpp>

#include "amg/error.hpp"
#include "amg/render.hpp"
#include "amg/vlm.hpp"

namespace amg {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, where + ": " + what);
}

// Key-tracking view over a JSON object; finish() rejects keys nobody read.
class Obj {
 public:
  Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) config_error(where_, "expected an object");
  }

  const json* get(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = get(key);
    if (!v) config_error(where_, "missing required key '" + key + "'");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    return as_number(*v, path(key));
  }

  int integer(const std::string& key, int fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) config_error(path(key), "expected an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) config_error(path(key), "expected true/false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) config_error(path(key), "expected a string");
    return v->get<std::string>();
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.contains(key)) config_error(where_, "unknown key '" + key + "'");
    }
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

  static double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) config_error(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) config_error(where, "expected a finite number");
    return d;
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

WorldPoint parse_point(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) config_error(where, "expected [x, y]");
  return {Obj::as_number(v[0], where + "[0]"), Obj::as_number(v[1], where + "[1]")};
}

std::vector<WorldRect> parse_rects(const json* v, const std::string& where) {
  std::vector<WorldRect> out;
  if (!v) return out;
  if (!v->is_array()) config_error(where, "expected an array");
  for (std::size_t i = 0; i < v->size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    Obj o((*v)[i], w);
    WorldRect r{parse_point(o.require("min"), w + ".min"), parse_point(o.require("max"), w + ".max")};
    o.finish();
    if (!(r.min.x <= r.max.x && r.min.y <= r.max.y)) config_error(w, "min must not exceed max");
    out.push_back(r);
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

MapSource parse_map(const json& j, const fs::path& base) {
  Obj o(j, "map");
  MapSource src;
  if (const json* syn = o.get("synthetic")) {
    Obj s(*syn, "map.synthetic");
    SyntheticMap m;
    m.geometry.width = s.integer("width", 0);
    m.geometry.height = s.integer("height", 0);
    m.geometry.resolution = s.number("resolution", 0.25);
    if (const json* origin = s.get("origin")) m.geometry.origin = parse_point(*origin, "map.synthetic.origin");
    m.obstacles = parse_rects(s.get("obstacles"), "map.synthetic.obstacles");
    m.unknown = parse_rects(s.get("unknown"), "map.synthetic.unknown");
    s.finish();
    src.synthetic = std::move(m);
  }
  const std::string pgm = o.string("pgm", "");
  const std::string meta = o.string("metadata", "");
  o.finish();
  if (!meta.empty()) {
    src.metadata = load_map_metadata(resolve(base, meta));
    if (pgm.empty() && src.metadata->image) src.pgm = *src.metadata->image;
  }
  if (!pgm.empty()) src.pgm = resolve(base, pgm);
  if (src.synthetic.has_value() == src.pgm.has_value()) {
    config_error("map", "give exactly one of 'synthetic' or 'pgm' (+ 'metadata')");
  }
  if (src.pgm && !src.metadata) config_error("map", "'pgm' needs 'metadata'");
  return src;
}

ClassifierSpec parse_classifier(const json& j, const fs::path& base) {
  Obj o(j, "classifier");
  ClassifierSpec c;
  const std::string type = o.string("type", "mock");
  if (type == "mock") {
    c.mode = ClassifierMode::mock;
  } else if (type == "replay") {
    c.mode = ClassifierMode::replay;
  } else if (type == "vlm") {
    c.mode = ClassifierMode::vlm;
  } else {
    config_error("classifier.type", "expected mock, replay or vlm");
  }
  c.detect_range = o.number("detect_range", c.detect_range);
  c.fov_half_angle = o.number("fov_half_angle_deg", 60.0) * std::numbers::pi / 180.0;
  c.flip_probability = o.number("flip_probability", c.flip_probability);
  if (const json* seed = o.get("seed")) {
    if (!seed->is_number_unsigned()) config_error("classifier.seed", "expected a non-negative integer");
    c.seed = seed->get<std::uint64_t>();
  }
  c.match_radius = o.number("match_radius", c.match_radius);
  c.model = o.string("model", c.model);
  const std::string prompt = o.string("prompt_file", "");
  if (!prompt.empty()) c.prompt_file = resolve(base, prompt);
  c.timeout_s = o.number("timeout_s", c.timeout_s);
  c.max_retries = o.integer("max_retries", c.max_retries);
  o.finish();
  return c;
}

TrajectorySpec parse_trajectory(const json& j, std::size_t index, const fs::path& base) {
  const std::string where = "trajectories[" + std::to_string(index) + "]";
  Obj o(j, where);
  TrajectorySpec t;
  t.tag = o.string("tag", "");
  const json& wps = o.require("waypoints");
  if (!wps.is_array()) config_error(where + ".waypoints", "expected an array");
  for (std::size_t i = 0; i < wps.size(); ++i) {
    t.waypoints.push_back(parse_point(wps[i], where + ".waypoints[" + std::to_string(i) + "]"));
  }
  t.observe.interval = o.number("interval", 3.0);
  t.observe.offset_distance = o.number("offset", 0.0);
  t.observe.speed = o.number("speed", 1.0);
  t.observe.start_time = o.number("start_time", 0.0);
  if (const json* crowds = o.get("crowds")) {
    if (!crowds->is_array()) config_error(where + ".crowds", "expected an array");
    for (std::size_t i = 0; i < crowds->size(); ++i) {
      const std::string w = where + ".crowds[" + std::to_string(i) + "]";
      Obj c((*crowds)[i], w);
      CrowdDisc d{parse_point(c.require("center"), w + ".center"), c.number("radius", 1.0)};
      c.finish();
      t.crowds.push_back(d);
    }
  }
  const std::string replay = o.string("replay_log", "");
  if (!replay.empty()) t.replay_log = resolve(base, replay);
  const std::string images = o.string("images", "");
  if (!images.empty()) t.images = resolve(base, images);
  o.finish();
  return t;
}

WeightMap parse_weight_object(const json& j, const std::string& where) {
  if (!j.is_object()) config_error(where, "expected an object of tag: weight");
  WeightMap w;
  for (const auto& [key, value] : j.items()) w[key] = Obj::as_number(value, where + "." + key);
  return w;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

ScenarioConfig parse_scenario(std::string_view json_text, const fs::path& base_dir) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ConfigError, "scenario is not valid JSON");
  ScenarioConfig c;
  try {
    Obj o(j, "scenario");
    c.name = o.string("name", c.name);
    c.map = parse_map(o.require("map"), base_dir);
    c.unknown_cost = o.integer("unknown_cost", c.unknown_cost);
    if (const json* cls = o.get("classifier")) c.classifier = parse_classifier(*cls, base_dir);
    const json& trajs = o.require("trajectories");
    if (!trajs.is_array()) config_error("trajectories", "expected an array");
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      c.trajectories.push_back(parse_trajectory(trajs[i], i, base_dir));
    }
    if (const json* g = o.get("gpr")) {
      Obj go(*g, "gpr");
      c.gpr.lengthscale = go.number("lengthscale", c.gpr.lengthscale);
      c.gpr.signal_variance = go.number("signal_variance", c.gpr.signal_variance);
      c.gpr.noise_variance = go.number("noise_variance", c.gpr.noise_variance);
      c.gpr.jitter = go.number("jitter", c.gpr.jitter);
      go.finish();
    }
    c.kappa = o.number("kappa", c.kappa);
    if (const json* w = o.get("weights")) c.weights = parse_weight_object(*w, "weights");
    if (const json* ws = o.get("weight_sets")) {
      if (!ws->is_array()) config_error("weight_sets", "expected an array");
      for (std::size_t i = 0; i < ws->size(); ++i) {
        c.weight_sets.push_back(parse_weight_object((*ws)[i], "weight_sets[" + std::to_string(i) + "]"));
      }
    }
    if (const json* l = o.get("lethal")) {
      Obj lo(*l, "lethal");
      c.lethal_enabled = lo.boolean("enabled", c.lethal_enabled);
      c.lethal_threshold = lo.integer("threshold", c.lethal_threshold);
      lo.finish();
    }
    if (const json* p = o.get("planner")) {
      Obj po(*p, "planner");
      const std::string conn = po.string("connectivity", "eight");
      if (conn == "eight") {
        c.planner.connectivity = Connectivity::eight;
      } else if (conn == "four") {
        c.planner.connectivity = Connectivity::four;
      } else {
        config_error("planner.connectivity", "expected 'four' or 'eight'");
      }
      c.planner.traversal_gamma = po.number("gamma", c.planner.traversal_gamma);
      c.planner.impassable_threshold = po.integer("impassable_threshold", c.planner.impassable_threshold);
      po.finish();
    }
    c.start = parse_point(o.require("start"), "start");
    c.goal = parse_point(o.require("goal"), "goal");
    c.output_dir = o.string("output_dir", c.output_dir.string());
    o.finish();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (c.weights.empty() && c.weight_sets.empty()) {
    c.weights[kGeometricTag] = 1.0;
    for (const auto& t : c.trajectories) c.weights[t.tag] = 1.0;
  }
  validate(c);
  return c;
}

ScenarioConfig load_scenario(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_scenario(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                        path.parent_path());
}

namespace {

void validate_weights(const ScenarioConfig& c, const WeightMap& w, const std::string& where) {
  bool positive = false;
  for (const auto& [tag, weight] : w) {
    const bool known = tag == kGeometricTag ||
                       std::any_of(c.trajectories.begin(), c.trajectories.end(),
                                   [&](const TrajectorySpec& t) { return t.tag == tag; });
    if (!known) config_error(where, "weight for unknown layer '" + tag + "'");
    if (!(weight >= 0.0) || !std::isfinite(weight)) config_error(where, "weights must be >= 0");
    positive = positive || weight > 0.0;
  }
  if (!positive) config_error(where, "at least one weight must be positive");
}

GridGeometry scenario_geometry(const ScenarioConfig& c) {
  if (c.map.synthetic) return c.map.synthetic->geometry;
  return {};
}

}  // namespace

void validate(const ScenarioConfig& c) {
  const auto wrap = [](const std::string& where, auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      config_error(where, e.detail());
    }
  };
  if (c.map.synthetic) wrap("map.synthetic", [&] { validate_geometry(c.map.synthetic->geometry); });
  if (c.unknown_cost < 0 || c.unknown_cost > 255) config_error("unknown_cost", "must lie in [0, 255]");
  wrap("gpr", [&] { c.gpr.validate(); });
  wrap("planner", [&] { c.planner.validate(); });
  if (!std::isfinite(c.kappa)) config_error("kappa", "must be finite");
  if (c.lethal_threshold < 0 || c.lethal_threshold > 255) config_error("lethal.threshold", "must lie in [0, 255]");

  const auto& cls = c.classifier;
  if (!(cls.flip_probability >= 0.0 && cls.flip_probability <= 1.0)) {
    config_error("classifier.flip_probability", "must lie in [0, 1]");
  }
  if (cls.flip_probability > 0.0 && !cls.seed) {
    config_error("classifier.seed", "required when flip_probability > 0");
  }
  if (!(cls.detect_range >= 0.0)) config_error("classifier.detect_range", "must be >= 0");
  if (!(cls.fov_half_angle >= 0.0 && cls.fov_half_angle <= std::numbers::pi)) {
    config_error("classifier.fov_half_angle_deg", "must lie in [0, 180]");
  }

  static const std::regex tag_re("[A-Za-z0-9_-]+");
  std::set<std::string> tags;
  for (std::size_t i = 0; i < c.trajectories.size(); ++i) {
    const auto& t = c.trajectories[i];
    const std::string where = "trajectories[" + std::to_string(i) + "]";
    if (!std::regex_match(t.tag, tag_re)) config_error(where + ".tag", "must match [A-Za-z0-9_-]+");
    if (t.tag == kGeometricTag) config_error(where + ".tag", "'geometric' is reserved");
    if (!tags.insert(t.tag).second) config_error(where + ".tag", "duplicate tag '" + t.tag + "'");
    wrap(where, [&] { Trajectory traj(t.waypoints); });
    if (!(t.observe.interval > 0.0)) config_error(where + ".interval", "must be > 0");
    if (!(t.observe.speed > 0.0)) config_error(where + ".speed", "must be > 0");
    if (t.observe.start_time < 0.0) config_error(where + ".start_time", "must be >= 0");
    if (cls.mode == ClassifierMode::replay && !t.replay_log) {
      config_error(where, "replay classifier needs 'replay_log'");
    }
    if (cls.mode == ClassifierMode::vlm && !t.images) config_error(where, "vlm classifier needs 'images'");
  }

  if (!c.weights.empty()) validate_weights(c, c.weights, "weights");
  for (std::size_t i = 0; i < c.weight_sets.size(); ++i) {
    validate_weights(c, c.weight_sets[i], "weight_sets[" + std::to_string(i) + "]");
  }

  if (c.map.synthetic) {
    const auto g = scenario_geometry(c);
    if (!g.contains(c.start)) config_error("start", "outside map extent");
    if (!g.contains(c.goal)) config_error("goal", "outside map extent");
  }
}

WeightMap parse_weights(std::string_view text) {
  WeightMap w;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw Error(ErrorCode::ConfigError, "weights must look like tag=w,tag=w");
    }
    const auto value = parse_double(item.substr(eq + 1));
    if (!value || *value < 0.0) {
      throw Error(ErrorCode::ConfigError, "bad weight '" + std::string(item) + "'");
    }
    w[std::string(item.substr(0, eq))] = *value;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return w;
}

std::string format_weights(const WeightMap& weights) {
  std::string out;
  for (const auto& [tag, w] : weights) {
    if (!out.empty()) out += ',';
    out += tag + "=" + format_double(w);
  }
  return out;
}

std::string weights_dir_name(const WeightMap& weights, const std::vector<std::string>& order) {
  std::string out = "weights";
  for (const auto& tag : order) {
    const auto it = weights.find(tag);
    out += "_" + format_double(it == weights.end() ? 0.0 : it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline

GridMap rasterize(const SyntheticMap& spec) {
  validate_geometry(spec.geometry);
  const auto& g = spec.geometry;
  std::vector<double> values(g.cell_count(), kOccupancyFree);
  const auto paint = [&](const std::vector<WorldRect>& rects, double value) {
    for (const auto& rect : rects) {
      for (int r = 0; r < g.height; ++r) {
        for (int c = 0; c < g.width; ++c) {
          const auto p = g.grid_to_world({r, c});
          if (p.x >= rect.min.x && p.x < rect.max.x && p.y >= rect.min.y && p.y < rect.max.y) {
            values[g.offset({r, c})] = value;
          }
        }
      }
    }
  };
  paint(spec.unknown, kOccupancyUnknown);
  paint(spec.obstacles, kOccupancyOccupied);
  return GridMap(g, GridKind::occupancy, std::move(values));
}

GridMap build_occupancy(const ScenarioConfig& config) {
  if (config.map.synthetic) return rasterize(*config.map.synthetic);
  return load_pgm(*config.map.pgm, *config.map.metadata);
}

std::unique_ptr<AbstractionSource> make_classifier(const ScenarioConfig& config,
                                                   const TrajectorySpec& trajectory,
                                                   const RunOptions& options) {
  const auto& spec = config.classifier;
  switch (spec.mode) {
    case ClassifierMode::mock: {
      MockClassifierParams p;
      p.crowds = trajectory.crowds;
      p.detect_range = spec.detect_range;
      p.fov_half_angle = spec.fov_half_angle;
      p.flip_probability = spec.flip_probability;
      p.seed = options.seed.value_or(spec.seed.value_or(0));
      return std::make_unique<MockCrowdClassifier>(std::move(p));
    }
    case ClassifierMode::replay:
      return std::make_unique<ReplayClassifier>(log_read(*trajectory.replay_log), spec.match_radius);
    case ClassifierMode::vlm: {
      if (!options.live_vlm) {
        throw Error(ErrorCode::ConfigError, "classifier type 'vlm' needs the --live-vlm opt-in");
      }
      VlmClientConfig vc = vlm_config_from_env();
      vc.model = spec.model;
      vc.timeout_s = spec.timeout_s;
      vc.max_retries = spec.max_retries;
      if (spec.prompt_file) {
        const auto bytes = read_file_bytes(*spec.prompt_file);
        vc.prompt.assign(bytes.begin(), bytes.end());
      }
      return std::make_unique<VlmClassifier>(std::move(vc), directory_image_provider(*trajectory.images));
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown classifier mode");
}

namespace {

// Runs one pipeline stage, records its wall time and tags errors with
// "stage[layer]".
template <typename Fn>
auto staged(std::vector<StageTiming>& timings, const std::string& stage, const std::string& layer, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      timings.push_back({stage, layer, seconds_since(t0)});
    } else {
      auto result = fn();
      timings.push_back({stage, layer, seconds_since(t0)});
      return result;
    }
  } catch (const Error& e) {
    throw e.with_stage(layer.empty() ? stage : stage + "[" + layer + "]");
  }
}

}  // namespace

PreparedScenario prepare(const ScenarioConfig& config, const RunOptions& options) {
  validate(config);
  std::vector<StageTiming> timings;

  GridMap occupancy = staged(timings, "map", kGeometricTag, [&] { return build_occupancy(config); });
  CostLayer geometric = occupancy_to_cost(occupancy, config.unknown_cost, kGeometricTag);

  const auto& geom = occupancy.geometry();
  const auto locate = [&](WorldPoint p, const char* what) {
    try {
      return geom.world_to_grid(p);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string(what) + ": " + e.detail());
    }
  };
  PreparedScenario prep{config, std::move(occupancy), std::move(geometric), {},
                        locate(config.start, "start"), locate(config.goal, "goal"), {}};

  for (const auto& spec : config.trajectories) {
    AbstractionLayerState layer;
    layer.tag = spec.tag;
    layer.observations = staged(timings, "observe", spec.tag, [&] {
      auto classifier = make_classifier(config, spec, options);
      return observe_along(Trajectory(spec.waypoints), *classifier, spec.tag, spec.observe);
    });
    layer.model = staged(timings, "fit", spec.tag, [&] {
      std::vector<WorldPoint> points;
      std::vector<double> targets;
      for (const auto& obs : layer.observations) {
        points.push_back(obs.projected_position);
        targets.push_back(encode(obs.label));
      }
      return GprModel::fit(points, targets, config.gpr);
    });
    layer.prediction = staged(timings, "predict", spec.tag, [&] { return predict_grid(*layer.model, geom); });
    layer.cost = staged(timings, "cost", spec.tag, [&] {
      return mean_to_cost(layer.prediction->mean, layer.prediction->variance, config.kappa, spec.tag);
    });
    prep.layers.push_back(std::move(layer));
  }
  prep.timings = std::move(timings);
  return prep;
}

ScenarioReport evaluate(const PreparedScenario& prep, const WeightMap& weights) {
  validate_weights(prep.config, weights, "weights");
  ScenarioReport report;
  report.name = prep.config.name;
  report.weights = weights;
  report.timings = prep.timings;

  const auto weight_of = [&](const std::string& tag) {
    const auto it = weights.find(tag);
    return it == weights.end() ? 0.0 : it->second;
  };

  LayerStack stack;
  stack.lethal_enabled = prep.config.lethal_enabled;
  stack.lethal_threshold = prep.config.lethal_threshold;
  stack.layers.push_back({prep.geometric, weight_of(kGeometricTag)});
  for (const auto& layer : prep.layers) {
    stack.layers.push_back({*layer.cost, weight_of(layer.tag)});
    LayerSummary s{layer.tag, layer.observations.size(), 0, 0};
    for (const auto& obs : layer.observations) {
      (obs.label == AbstractLabel::crowd ? s.crowd : s.free) += 1;
    }
    report.layers.push_back(s);
  }

  GridMap fused = staged(report.timings, "fuse", "", [&] { return fuse(stack); });

  const auto values = fused.values();
  report.fused_stats.min = *std::min_element(values.begin(), values.end());
  report.fused_stats.max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  report.fused_stats.mean = sum / static_cast<double>(values.size());

  report.path = staged(report.timings, "plan", "",
                       [&] { return plan(fused, prep.start, prep.goal, prep.config.planner); });

  const auto exposure = [&](const GridMap& layer) {
    double total = 0.0;
    for (const auto& cell : report.path.cells) total += layer[cell];
    return total;
  };
  report.exposure[kGeometricTag] = exposure(prep.geometric.grid);
  for (const auto& layer : prep.layers) report.exposure[layer.tag] = exposure(layer.cost->grid);
  report.fused = std::move(fused);
  return report;
}

void write_layer_artifacts(const PreparedScenario& prep, const fs::path& dir) {
  fs::create_directories(dir);
  save_pgm(prep.geometric.grid, dir / "geometric.pgm");
  for (const auto& layer : prep.layers) {
    log_write(layer.observations, dir / (layer.tag + "_observations.csv"));
    save_raster(layer.prediction->mean, dir / (layer.tag + "_mean.raster"));
    save_raster(layer.prediction->variance, dir / (layer.tag + "_variance.raster"));
    save_pgm(layer.cost->grid, dir / (layer.tag + "_cost.pgm"));
  }
}

std::string report_json(const ScenarioReport& report) {
  json j;
  j["name"] = report.name;
  j["weights"] = report.weights;
  j["layers"] = json::array();
  for (const auto& l : report.layers) {
    j["layers"].push_back({{"tag", l.tag}, {"observations", l.observations}, {"crowd", l.crowd}, {"free", l.free}});
  }
  j["fused"] = {{"min", report.fused_stats.min}, {"max", report.fused_stats.max}, {"mean", report.fused_stats.mean}};
  j["path"] = {{"cells", report.path.cells.size()},
               {"total_cost", report.path.total_cost},
               {"length_m", report.path.length_m}};
  if (!report.path.cells.empty()) {
    j["path"]["start"] = {report.path.cells.front().row, report.path.cells.front().col};
    j["path"]["goal"] = {report.path.cells.back().row, report.path.cells.back().col};
  }
  j["exposure"] = report.exposure;
  // Stage order only; wall times vary run to run and stay out of artifacts.
  j["stages"] = json::array();
  for (const auto& t : report.timings) {
    j["stages"].push_back(t.layer.empty() ? t.stage : t.stage + "[" + t.layer + "]");
  }
  return j.dump(2) + "\n";
}

void write_result_artifacts(const PreparedScenario& prep, const ScenarioReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  if (!report.fused) throw Error(ErrorCode::InvalidArgument, "report carries no fused map");
  write_path(*report.fused, report.path, dir / "path.txt");
  write_text_file(dir / "report.json", report_json(report));
  RenderInputs in;
  in.geometric = &prep.geometric;
  in.fused = &*report.fused;
  in.path = &report.path;
  in.signal_variance = prep.config.gpr.signal_variance;
  for (const auto& layer : prep.layers) {
    in.layers.push_back({&*layer.cost, &layer.prediction->mean, &layer.prediction->variance});
  }
  render(in, dir);
}

ScenarioReport run(const ScenarioConfig& config, const RunOptions& options) {
  const auto prep = prepare(config, options);
  auto report = evaluate(prep, config.weights);
  if (options.write_artifacts) {
    write_layer_artifacts(prep, config.output_dir);
    write_result_artifacts(prep, report, config.output_dir);
  }
  return report;
}

std::vector<ScenarioReport> run_temporal(const ScenarioConfig& config, const RunOptions& options) {
  if (config.weight_sets.empty()) throw Error(ErrorCode::ConfigError, "scenario has no weight_sets");
  const auto prep = prepare(config, options);
  std::vector<std::string> order{kGeometricTag};
  for (const auto& t : config.trajectories) order.push_back(t.tag);
  if (options.write_artifacts) write_layer_artifacts(prep, config.output_dir);
  std::vector<ScenarioReport> reports;
  for (const auto& weights : config.weight_sets) {
    auto report = evaluate(prep, weights);
    if (options.write_artifacts) {
      write_result_artifacts(prep, report, config.output_dir / weights_dir_name(weights, order));
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace amg
