#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "amg/error.hpp"
#include "amg/gpr.hpp"
#include "amg/layers.hpp"
#include "amg/map_io.hpp"
#include "amg/observation.hpp"
#include "amg/oracle.hpp"
#include "amg/planner.hpp"
#include "amg/render.hpp"
#include "amg/scenario.hpp"
#include "amg/vlm.hpp"

namespace fs = std::filesystem;
using namespace amg;

namespace {

enum Exit : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kNoPath = 3,
  kClassifier = 4,
  kIo = 5,
  kVerify = 6,
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
      return kConfig;
    case ErrorCode::NoPath:
    case ErrorCode::StartBlocked:
    case ErrorCode::GoalBlocked:
      return kNoPath;
    case ErrorCode::TransportError:
    case ErrorCode::MalformedResponse:
    case ErrorCode::AuthError:
    case ErrorCode::NoMatchingObservation:
      return kClassifier;
    case ErrorCode::IoError:
    case ErrorCode::ParseError:
    case ErrorCode::UnsupportedFormat:
      return kIo;
    case ErrorCode::VerifyMismatch:
      return kVerify;
    default:
      return kOther;
  }
}

WorldPoint parse_xy(const std::string& text, const char* what) {
  const auto comma = text.find(',');
  const auto x = comma == std::string::npos ? std::nullopt : parse_double(std::string_view(text).substr(0, comma));
  const auto y = comma == std::string::npos ? std::nullopt : parse_double(std::string_view(text).substr(comma + 1));
  if (!x || !y) throw Error(ErrorCode::ConfigError, std::string(what) + " must look like x,y");
  return {*x, *y};
}

void print_timings(const std::vector<StageTiming>& timings) {
  for (const auto& t : timings) {
    std::fprintf(stderr, "timing %-8s %-12s %.6f s\n", t.stage.c_str(), t.layer.c_str(), t.seconds);
  }
}

// Spatial extent of a raster or PGM when no scenario config is given.
struct Placement {
  double resolution = 1.0;
  WorldPoint origin{};
};

Placement placement_from(const std::string& config, double resolution, const std::string& origin) {
  Placement p;
  if (!config.empty()) {
    const auto c = load_scenario(config);
    const auto occ = build_occupancy(c);
    p.resolution = occ.geometry().resolution;
    p.origin = occ.geometry().origin;
  }
  if (resolution > 0.0) p.resolution = resolution;
  if (!origin.empty()) p.origin = parse_xy(origin, "--origin");
  return p;
}

// --- classify -------------------------------------------------------------

struct ClassifyArgs {
  std::string image;
  std::string prompt_file;
  std::string model = std::string(kDefaultVlmModel);
  bool live_vlm = false;
};

int cmd_classify(const ClassifyArgs& a) {
  if (!a.live_vlm) throw Error(ErrorCode::ConfigError, "classify contacts the VLM endpoint; pass --live-vlm");
  auto cfg = vlm_config_from_env();
  cfg.model = a.model;
  if (!a.prompt_file.empty()) {
    const auto bytes = read_file_bytes(a.prompt_file);
    cfg.prompt.assign(bytes.begin(), bytes.end());
  }
  VlmClassifier vlm(cfg);
  const auto bytes = read_file_bytes(a.image);
  const auto label = vlm.classify_image(bytes, image_mime_type(a.image));
  std::cout << to_string(label) << "\n";
  return kOk;
}

// --- observe --------------------------------------------------------------

struct ObserveArgs {
  std::string config;
  std::string out;
  std::string trajectory;
  std::optional<std::uint64_t> seed;
  bool live_vlm = false;
};

int cmd_observe(const ObserveArgs& a) {
  const auto config = load_scenario(a.config);
  const fs::path out = a.out.empty() ? config.output_dir : fs::path(a.out);
  fs::create_directories(out);
  RunOptions opts{a.live_vlm, a.seed, false};
  bool any = false;
  for (const auto& spec : config.trajectories) {
    if (!a.trajectory.empty() && spec.tag != a.trajectory) continue;
    any = true;
    auto classifier = make_classifier(config, spec, opts);
    const auto obs = observe_along(Trajectory(spec.waypoints), *classifier, spec.tag, spec.observe);
    const auto file = out / (spec.tag + "_observations.csv");
    log_write(obs, file);
    std::size_t crowd = 0;
    for (const auto& o : obs) crowd += o.label == AbstractLabel::crowd;
    std::cout << spec.tag << ": " << obs.size() << " observations (" << crowd << " crowd) -> " << file.string()
              << "\n";
  }
  if (!any) throw Error(ErrorCode::ConfigError, "no trajectory tagged '" + a.trajectory + "'");
  return kOk;
}

// --- map ------------------------------------------------------------------

struct MapArgs {
  std::string config;
  std::string log;
  std::string out;
  std::string tag;
  bool verify = false;
};

constexpr double kVerifyGprTol = 1e-8;
constexpr std::size_t kVerifyQueries = 200;

void verify_gpr(const std::vector<WorldPoint>& points, const std::vector<double>& targets,
                const Hyperparameters& hyper, const GridGeometry& geom) {
  const std::size_t n = std::min(points.size(), oracle::kMaxGprPoints);
  const std::span<const WorldPoint> p(points.data(), n);
  const std::span<const double> t(targets.data(), n);
  const auto model = GprModel::fit(p, t, hyper);
  const std::size_t cells = geom.cell_count();
  const std::size_t stride = std::max<std::size_t>(1, cells / kVerifyQueries);
  std::ostringstream diff;
  std::size_t checked = 0;
  std::size_t bad = 0;
  for (std::size_t k = 0; k < cells; k += stride) {
    const GridIndex idx{static_cast<int>(k / static_cast<std::size_t>(geom.width)),
                        static_cast<int>(k % static_cast<std::size_t>(geom.width))};
    const auto q = geom.grid_to_world(idx);
    const auto a = model.predict(q);
    const auto b = oracle::predict(p, t, hyper, q);
    ++checked;
    if (std::abs(a.mean - b.mean) > kVerifyGprTol || std::abs(a.variance - b.variance) > kVerifyGprTol) {
      ++bad;
      diff << "  cell (" << idx.row << "," << idx.col << "): mean " << format_double(a.mean) << " vs "
           << format_double(b.mean) << ", variance " << format_double(a.variance) << " vs "
           << format_double(b.variance) << "\n";
    }
  }
  std::cerr << "verify: GPR on " << n << " points, " << checked << " cells, " << bad << " mismatches\n";
  if (bad) {
    std::cerr << diff.str();
    throw Error(ErrorCode::VerifyMismatch, "GPR disagrees with the dense oracle");
  }
}

int cmd_map(const MapArgs& a) {
  const auto config = load_scenario(a.config);
  const auto occ = build_occupancy(config);
  const auto& geom = occ.geometry();
  auto obs = log_read(a.log);
  if (!a.tag.empty()) {
    std::erase_if(obs, [&](const Observation& o) { return o.layer_tag != a.tag; });
  }
  if (obs.empty()) throw Error(ErrorCode::ParseError, "observation log holds no usable records");
  const std::string tag = a.tag.empty() ? obs.front().layer_tag : a.tag;
  std::vector<WorldPoint> points;
  std::vector<double> targets;
  for (const auto& o : obs) {
    points.push_back(o.projected_position);
    targets.push_back(encode(o.label));
  }
  if (a.verify) verify_gpr(points, targets, config.gpr, geom);
  const auto model = GprModel::fit(points, targets, config.gpr);
  const auto grids = predict_grid(model, geom);
  const auto cost = mean_to_cost(grids.mean, grids.variance, config.kappa, tag);
  const fs::path out = a.out.empty() ? config.output_dir : fs::path(a.out);
  fs::create_directories(out);
  save_raster(grids.mean, out / (tag + "_mean.raster"));
  save_raster(grids.variance, out / (tag + "_variance.raster"));
  save_pgm(cost.grid, out / (tag + "_cost.pgm"));
  std::cout << tag << ": fitted " << points.size() << " observations -> " << out.string() << "\n";
  return kOk;
}

// --- fuse -----------------------------------------------------------------

struct FuseArgs {
  std::vector<std::string> layers;
  std::string weights;
  std::string out = "fused.pgm";
  std::string config;
  double resolution = 0.0;
  std::string origin;
  bool no_lethal = false;
  int lethal_threshold = kLethalCost;
};

int cmd_fuse(const FuseArgs& a) {
  const auto place = placement_from(a.config, a.resolution, a.origin);
  const WeightMap weights = a.weights.empty() ? WeightMap{} : parse_weights(a.weights);
  LayerStack stack;
  stack.lethal_enabled = !a.no_lethal;
  stack.lethal_threshold = a.lethal_threshold;
  for (const auto& spec : a.layers) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::ConfigError, "--layer must look like tag=file.pgm");
    const std::string tag = spec.substr(0, eq);
    double w = 1.0;
    if (!weights.empty()) {
      const auto it = weights.find(tag);
      w = it == weights.end() ? 0.0 : it->second;
    }
    const auto role = tag == kGeometricTag ? LayerRole::geometric : LayerRole::abstraction;
    stack.layers.push_back({CostLayer{load_cost_pgm(spec.substr(eq + 1), place.resolution, place.origin), tag, role}, w});
  }
  for (const auto& [tag, _] : weights) {
    const bool known = std::any_of(stack.layers.begin(), stack.layers.end(),
                                   [&](const WeightedLayer& l) { return l.layer.tag == tag; });
    if (!known) throw Error(ErrorCode::ConfigError, "weight given for missing layer '" + tag + "'");
  }
  const auto fused = fuse(stack);
  save_pgm(fused, a.out);
  std::cout << "fused " << stack.layers.size() << " layers -> " << a.out << "\n";
  return kOk;
}

// --- plan -----------------------------------------------------------------

struct PlanArgs {
  std::string map;
  std::string start;
  std::string goal;
  std::string out = "path.txt";
  std::string config;
  double resolution = 0.0;
  std::string origin;
  std::string connectivity;
  std::optional<double> gamma;
  std::optional<int> impassable;
  bool verify = false;
};

constexpr int kVerifySide = 6;

// Block-max downsampling keeps every impassable cell impassable.
GridMap downsample_max(const GridMap& map, int side_rows, int side_cols) {
  const auto& g = map.geometry();
  GridGeometry small{side_cols, side_rows, 1.0, {}};
  std::vector<double> v(small.cell_count(), 0.0);
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      const int sr = r * side_rows / g.height;
      const int sc = c * side_cols / g.width;
      auto& cell = v[small.offset({sr, sc})];
      cell = std::max(cell, map[{r, c}]);
    }
  }
  return GridMap(small, GridKind::cost, std::move(v));
}

void verify_plan(const GridMap& fused, GridIndex start, GridIndex goal, const PlannerConfig& cfg) {
  const auto& g = fused.geometry();
  const int rows = std::min(g.height, kVerifySide);
  const int cols = std::min(g.width, kVerifySide);
  const auto small = downsample_max(fused, rows, cols);
  const GridIndex s{start.row * rows / g.height, start.col * cols / g.width};
  const GridIndex t{goal.row * rows / g.height, goal.col * cols / g.width};
  const auto attempt = [&](auto&& fn) -> std::pair<std::optional<Path>, std::optional<ErrorCode>> {
    try {
      return {fn(), std::nullopt};
    } catch (const Error& e) {
      return {std::nullopt, e.code()};
    }
  };
  const auto a = attempt([&] { return plan(small, s, t, cfg); });
  const auto b = attempt([&] { return oracle::plan(small, s, t, cfg); });
  std::ostringstream diff;
  if (a.second || b.second) {
    if (a.second != b.second) {
      diff << "  planner " << (a.second ? to_string(*a.second) : "ok") << ", oracle "
           << (b.second ? to_string(*b.second) : "ok") << "\n";
    }
  } else if (std::abs(a.first->total_cost - b.first->total_cost) > 1e-9 * std::max(1.0, b.first->total_cost)) {
    diff << "  total_cost planner " << format_double(a.first->total_cost) << ", oracle "
         << format_double(b.first->total_cost) << "\n";
  }
  std::cerr << "verify: planner vs oracle on " << rows << "x" << cols << " block-max map: "
            << (diff.str().empty() ? "agree" : "MISMATCH") << "\n";
  if (!diff.str().empty()) {
    std::cerr << diff.str();
    throw Error(ErrorCode::VerifyMismatch, "planner disagrees with the exhaustive oracle");
  }
}

int cmd_plan(const PlanArgs& a) {
  const auto place = placement_from(a.config, a.resolution, a.origin);
  PlannerConfig cfg;
  if (!a.config.empty()) cfg = load_scenario(a.config).planner;
  if (a.connectivity == "four") {
    cfg.connectivity = Connectivity::four;
  } else if (a.connectivity == "eight") {
    cfg.connectivity = Connectivity::eight;
  } else if (!a.connectivity.empty()) {
    throw Error(ErrorCode::ConfigError, "--connectivity must be four or eight");
  }
  if (a.gamma) cfg.traversal_gamma = *a.gamma;
  if (a.impassable) cfg.impassable_threshold = *a.impassable;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.detail());
  }
  const auto fused = load_cost_pgm(a.map, place.resolution, place.origin);
  const auto locate = [&](const std::string& text, const char* what) {
    try {
      return fused.geometry().world_to_grid(parse_xy(text, what));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string(what) + ": " + e.detail());
    }
  };
  const auto start = locate(a.start, "--start");
  const auto goal = locate(a.goal, "--goal");
  if (a.verify) verify_plan(fused, start, goal, cfg);
  const auto path = plan(fused, start, goal, cfg);
  write_path(fused, path, a.out);
  std::cout << "path: " << path.cells.size() << " cells, total_cost " << format_double(path.total_cost)
            << ", length " << format_double(path.length_m) << " m -> " << a.out << "\n";
  return kOk;
}

// --- run ------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool live_vlm = false;
  std::string weights;
};

int cmd_run(const RunArgs& a) {
  auto config = load_scenario(a.config);
  if (!a.out.empty()) config.output_dir = a.out;
  if (!a.weights.empty()) {
    config.weights = parse_weights(a.weights);
    config.weight_sets.clear();
    validate(config);
  }
  RunOptions opts{a.live_vlm, a.seed, true};
  std::vector<ScenarioReport> reports;
  if (!config.weight_sets.empty()) {
    reports = run_temporal(config, opts);
  } else {
    reports.push_back(run(config, opts));
  }
  for (const auto& r : reports) {
    print_timings(r.timings);
    std::cout << "weights " << format_weights(r.weights) << ": path " << r.path.cells.size() << " cells, total_cost "
              << format_double(r.path.total_cost) << ", length " << format_double(r.path.length_m) << " m";
    for (const auto& [tag, e] : r.exposure) {
      if (tag != kGeometricTag) std::cout << ", " << tag << " exposure " << format_double(e);
    }
    std::cout << "\n";
  }
  std::cout << "artifacts -> " << config.output_dir.string() << "\n";
  return kOk;
}

// --- render ---------------------------------------------------------------

struct RenderArgs {
  std::string run_dir;
  std::string out;
  double signal_variance = 1.0;
};

int cmd_render(const RenderArgs& a) {
  const fs::path dir = a.run_dir;
  // Temporal runs keep per-layer files one level up from each weighting.
  const fs::path layers_dir = fs::exists(dir / "geometric.pgm") ? dir : dir.parent_path();
  if (!fs::exists(layers_dir / "geometric.pgm")) {
    throw Error(ErrorCode::IoError, "no geometric.pgm in " + dir.string() + " or its parent");
  }
  const auto geo_grid = load_cost_pgm(layers_dir / "geometric.pgm");
  const CostLayer geometric{geo_grid, kGeometricTag, LayerRole::geometric};

  std::vector<std::string> tags;
  const std::string suffix = "_cost.pgm";
  for (const auto& entry : fs::directory_iterator(layers_dir)) {
    const auto name = entry.path().filename().string();
    if (name.size() > suffix.size() && name.ends_with(suffix)) tags.push_back(name.substr(0, name.size() - suffix.size()));
  }
  std::sort(tags.begin(), tags.end());

  std::vector<CostLayer> costs;
  std::vector<GridMap> means;
  std::vector<GridMap> variances;
  costs.reserve(tags.size());
  means.reserve(tags.size());
  variances.reserve(tags.size());
  RenderInputs in;
  in.geometric = &geometric;
  in.signal_variance = a.signal_variance;
  for (const auto& tag : tags) {
    costs.push_back({load_cost_pgm(layers_dir / (tag + suffix)), tag, LayerRole::abstraction});
    RenderLayer rl{&costs.back(), nullptr, nullptr};
    if (fs::exists(layers_dir / (tag + "_mean.raster"))) {
      means.push_back(load_raster(layers_dir / (tag + "_mean.raster")));
      rl.mean = &means.back();
    }
    if (fs::exists(layers_dir / (tag + "_variance.raster"))) {
      variances.push_back(load_raster(layers_dir / (tag + "_variance.raster")));
      rl.variance = &variances.back();
    }
    in.layers.push_back(rl);
  }
  std::optional<GridMap> fused;
  if (fs::exists(dir / "fused.pgm")) {
    fused = load_cost_pgm(dir / "fused.pgm");
    in.fused = &*fused;
  }
  std::optional<Path> path;
  if (fs::exists(dir / "path.txt")) {
    path = read_path(dir / "path.txt");
    in.path = &*path;
  }
  const fs::path out = a.out.empty() ? dir : fs::path(a.out);
  render(in, out);
  std::cout << "rendered " << tags.size() << " abstraction layers -> " << out.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Abstraction map generator: crowd observations to GPR cost layers, fusion and planning"};
  app.require_subcommand(1);

  ClassifyArgs ca;
  auto* classify = app.add_subcommand("classify", "Classify one image as crowd|free with the VLM");
  classify->add_option("--image", ca.image, "Image file")->required();
  classify->add_option("--prompt-file", ca.prompt_file, "Prompt text override");
  classify->add_option("--model", ca.model, "Model name");
  classify->add_flag("--live-vlm", ca.live_vlm, "Allow network access to AMG_VLM_ENDPOINT");

  ObserveArgs oa;
  auto* observe = app.add_subcommand("observe", "Sample trajectories and write observation logs");
  observe->add_option("--config", oa.config, "Scenario JSON")->required();
  observe->add_option("--out", oa.out, "Output directory (default: scenario output_dir)");
  observe->add_option("--trajectory", oa.trajectory, "Only this layer tag");
  observe->add_option("--seed", oa.seed, "Override classifier seed");
  observe->add_flag("--live-vlm", oa.live_vlm, "Allow network access for vlm classifiers");

  MapArgs ma;
  auto* map = app.add_subcommand("map", "Fit GPR to an observation log and write mean/variance/cost");
  map->add_option("--config", ma.config, "Scenario JSON (map extent, gpr, kappa)")->required();
  map->add_option("--log", ma.log, "Observation log")->required();
  map->add_option("--out", ma.out, "Output directory");
  map->add_option("--tag", ma.tag, "Use only records with this layer tag");
  map->add_flag("--verify", ma.verify, "Cross-check against the dense oracle");

  FuseArgs fa;
  auto* fusecmd = app.add_subcommand("fuse", "Weighted fusion of cost PGMs");
  fusecmd->add_option("--layer", fa.layers, "tag=file.pgm (repeatable)")->required();
  fusecmd->add_option("--weights", fa.weights, "tag=w,... (default 1 each)");
  fusecmd->add_option("--out", fa.out, "Output PGM");
  fusecmd->add_option("--config", fa.config, "Scenario JSON for resolution/origin");
  fusecmd->add_option("--resolution", fa.resolution, "m/cell");
  fusecmd->add_option("--origin", fa.origin, "x,y");
  fusecmd->add_flag("--no-lethal", fa.no_lethal, "Disable the geometric lethal override");
  fusecmd->add_option("--lethal-threshold", fa.lethal_threshold, "Geometric cost treated as lethal");

  PlanArgs pa;
  auto* plancmd = app.add_subcommand("plan", "Dijkstra over a fused cost PGM");
  plancmd->add_option("--map", pa.map, "Fused cost PGM")->required();
  plancmd->add_option("--start", pa.start, "x,y in metres")->required();
  plancmd->add_option("--goal", pa.goal, "x,y in metres")->required();
  plancmd->add_option("--out", pa.out, "Path file");
  plancmd->add_option("--config", pa.config, "Scenario JSON for resolution/origin/planner");
  plancmd->add_option("--resolution", pa.resolution, "m/cell");
  plancmd->add_option("--origin", pa.origin, "x,y");
  plancmd->add_option("--connectivity", pa.connectivity, "four|eight");
  plancmd->add_option("--gamma", pa.gamma, "Traversal cost strength");
  plancmd->add_option("--impassable", pa.impassable, "Cost at which cells are blocked");
  plancmd->add_flag("--verify", pa.verify, "Cross-check against the exhaustive oracle");

  RunArgs ra;
  auto* runcmd = app.add_subcommand("run", "Run a full scenario");
  runcmd->add_option("--config", ra.config, "Scenario JSON")->required();
  runcmd->add_option("--out", ra.out, "Output directory (default: scenario output_dir)");
  runcmd->add_option("--seed", ra.seed, "Override classifier seed");
  runcmd->add_flag("--live-vlm", ra.live_vlm, "Allow network access for vlm classifiers");
  runcmd->add_option("--weights", ra.weights, "tag=w,... (replaces weights and weight_sets)");

  RenderArgs rn;
  auto* rendercmd = app.add_subcommand("render", "Render PGM/PNG views of a run directory");
  rendercmd->add_option("--run", rn.run_dir, "Run output directory")->required();
  rendercmd->add_option("--out", rn.out, "Output directory (default: the run directory)");
  rendercmd->add_option("--signal-variance", rn.signal_variance, "Variance scale for the variance view");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (classify->parsed()) return cmd_classify(ca);
    if (observe->parsed()) return cmd_observe(oa);
    if (map->parsed()) return cmd_map(ma);
    if (fusecmd->parsed()) return cmd_fuse(fa);
    if (plancmd->parsed()) return cmd_plan(pa);
    if (runcmd->parsed()) return cmd_run(ra);
    if (rendercmd->parsed()) return cmd_render(rn);
  } catch (const Error& e) {
    std::cerr << "amg: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "amg: IoError: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "amg: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
