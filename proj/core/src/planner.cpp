#include "amg/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

#include "amg/error.hpp"
#include "amg/map_io.hpp"

namespace amg {
namespace {

struct Step {
  int dr;
  int dc;
  double length;
};

constexpr std::array<Step, 8> kSteps = {{
    {-1, 0, 1.0},
    {0, -1, 1.0},
    {0, 1, 1.0},
    {1, 0, 1.0},
    {-1, -1, std::numbers::sqrt2},
    {-1, 1, std::numbers::sqrt2},
    {1, -1, std::numbers::sqrt2},
    {1, 1, std::numbers::sqrt2},
}};

std::string cell_text(GridIndex idx) {
  return "(" + std::to_string(idx.row) + ", " + std::to_string(idx.col) + ")";
}

struct Frontier {
  double cost;
  GridIndex cell;
};

// Min-heap on (cost, row, col).
struct FrontierGreater {
  bool operator()(const Frontier& a, const Frontier& b) const {
    return std::tie(a.cost, a.cell) > std::tie(b.cost, b.cell);
  }
};

class Grid {
 public:
  Grid(const GridMap& map, const PlannerConfig& cfg) : map_(map), cfg_(cfg) {}

  bool passable(GridIndex idx) const {
    return map_.geometry().contains(idx) && map_[idx] < cfg_.impassable_threshold;
  }

  // Neighbors reachable from `from` under connectivity and corner rules.
  template <typename Fn>
  void for_each_move(GridIndex from, Fn&& fn) const {
    const std::size_t n = cfg_.connectivity == Connectivity::eight ? 8 : 4;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& s = kSteps[k];
      const GridIndex to{from.row + s.dr, from.col + s.dc};
      if (!passable(to)) continue;
      if (s.dr != 0 && s.dc != 0 &&
          (!passable({from.row + s.dr, from.col}) || !passable({from.row, from.col + s.dc}))) {
        continue;
      }
      fn(to, s.length);
    }
  }

 private:
  const GridMap& map_;
  const PlannerConfig& cfg_;
};

}  // namespace

void PlannerConfig::validate() const {
  if (!(traversal_gamma >= 0.0) || !std::isfinite(traversal_gamma)) {
    throw Error(ErrorCode::InvalidArgument, "traversal_gamma must be >= 0");
  }
  if (impassable_threshold < 1 || impassable_threshold > 255) {
    throw Error(ErrorCode::InvalidArgument, "impassable_threshold must lie in [1, 255]");
  }
}

double edge_cost(double step, double from, double to, double gamma) noexcept {
  return step * (1.0 + gamma * (from + to) / (2.0 * 255.0));
}

Path plan(const GridMap& costmap, GridIndex start, GridIndex goal, const PlannerConfig& config) {
  config.validate();
  if (costmap.kind() != GridKind::cost) throw Error(ErrorCode::InvalidKind, "planner needs a cost grid");
  const auto& geom = costmap.geometry();
  if (!geom.contains(start)) throw Error(ErrorCode::OutOfBounds, "start " + cell_text(start));
  if (!geom.contains(goal)) throw Error(ErrorCode::OutOfBounds, "goal " + cell_text(goal));
  if (costmap[start] >= config.impassable_threshold) {
    throw Error(ErrorCode::StartBlocked, "start " + cell_text(start) + " is impassable");
  }
  if (costmap[goal] >= config.impassable_threshold) {
    throw Error(ErrorCode::GoalBlocked, "goal " + cell_text(goal) + " is impassable");
  }

  const Grid grid(costmap, config);
  const std::size_t n = geom.cell_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> parent(n, kNone);
  std::vector<bool> settled(n, false);
  std::priority_queue<Frontier, std::vector<Frontier>, FrontierGreater> open;

  dist[geom.offset(start)] = 0.0;
  open.push({0.0, start});
  const std::size_t goal_off = geom.offset(goal);
  while (!open.empty()) {
    const Frontier top = open.top();
    open.pop();
    const std::size_t u = geom.offset(top.cell);
    if (settled[u] || top.cost > dist[u]) continue;
    settled[u] = true;
    if (u == goal_off) break;
    const double cu = costmap[top.cell];
    grid.for_each_move(top.cell, [&](GridIndex to, double step) {
      const std::size_t v = geom.offset(to);
      if (settled[v]) return;
      const double nd = dist[u] + edge_cost(step, cu, costmap[to], config.traversal_gamma);
      if (nd < dist[v]) {
        dist[v] = nd;
        parent[v] = u;
        open.push({nd, to});
      }
    });
  }
  if (!settled[goal_off]) {
    throw Error(ErrorCode::NoPath, "goal " + cell_text(goal) + " unreachable from " + cell_text(start));
  }

  Path path;
  for (std::size_t v = goal_off; v != kNone; v = parent[v]) path.cells.push_back(geom.index_of(v));
  std::reverse(path.cells.begin(), path.cells.end());
  path.total_cost = dist[goal_off];
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const auto& a = path.cells[i - 1];
    const auto& b = path.cells[i];
    path.length_m += (a.row != b.row && a.col != b.col ? std::numbers::sqrt2 : 1.0) * geom.resolution;
  }
  return path;
}

Path evaluate_path(const GridMap& costmap, std::vector<GridIndex> cells, const PlannerConfig& config) {
  Path path;
  path.cells = std::move(cells);
  const auto& geom = costmap.geometry();
  for (std::size_t i = 0; i < path.cells.size(); ++i) {
    if (!geom.contains(path.cells[i])) throw Error(ErrorCode::OutOfBounds, cell_text(path.cells[i]));
    if (i == 0) continue;
    const auto& a = path.cells[i - 1];
    const auto& b = path.cells[i];
    const int dr = std::abs(a.row - b.row);
    const int dc = std::abs(a.col - b.col);
    const bool diagonal = dr == 1 && dc == 1;
    const bool straight = dr + dc == 1;
    if (!straight && !(diagonal && config.connectivity == Connectivity::eight)) {
      throw Error(ErrorCode::InvalidArgument,
                  "cells " + cell_text(a) + " and " + cell_text(b) + " are not adjacent");
    }
    const double step = diagonal ? std::numbers::sqrt2 : 1.0;
    path.total_cost += edge_cost(step, costmap[a], costmap[b], config.traversal_gamma);
    path.length_m += step * geom.resolution;
  }
  return path;
}

std::string format_path(const GridMap& costmap, const Path& path) {
  std::string out;
  for (const auto& cell : path.cells) {
    const auto w = costmap.grid_to_world(cell);
    out += std::to_string(cell.row) + "," + std::to_string(cell.col) + "," + format_double(w.x) +
           "," + format_double(w.y) + "\n";
  }
  out += "total_cost=" + format_double(path.total_cost) + ",length_m=" + format_double(path.length_m) +
         "\n";
  return out;
}

void write_path(const GridMap& costmap, const Path& path, const std::filesystem::path& file) {
  write_text_file(file, format_path(costmap, path));
}

Path read_path(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  Path path;
  std::string line;
  std::size_t line_no = 0;
  bool summary = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (summary) throw Error(ErrorCode::ParseError, "data after summary line").with_line(line_no);
    if (line.rfind("total_cost=", 0) == 0) {
      const auto comma = line.find(",length_m=");
      if (comma == std::string::npos) throw Error(ErrorCode::ParseError, "bad summary").with_line(line_no);
      const auto tc = parse_double(std::string_view(line).substr(11, comma - 11));
      const auto lm = parse_double(std::string_view(line).substr(comma + 10));
      if (!tc || !lm) throw Error(ErrorCode::ParseError, "bad summary numbers").with_line(line_no);
      path.total_cost = *tc;
      path.length_m = *lm;
      summary = true;
      continue;
    }
    std::array<std::string_view, 4> f;
    std::size_t start = 0;
    std::size_t k = 0;
    for (; k < 4; ++k) {
      const auto comma = line.find(',', start);
      f[k] = std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (k != 3) throw Error(ErrorCode::ParseError, "expected 4 fields").with_line(line_no);
    const auto r = parse_double(f[0]);
    const auto c = parse_double(f[1]);
    if (!r || !c || !parse_double(f[2]) || !parse_double(f[3]) || *r != std::floor(*r) ||
        *c != std::floor(*c)) {
      throw Error(ErrorCode::ParseError, "bad cell record").with_line(line_no);
    }
    path.cells.push_back({static_cast<int>(*r), static_cast<int>(*c)});
  }
  if (!summary) throw Error(ErrorCode::ParseError, "missing summary line").with_line(line_no + 1);
  return path;
}

}  // namespace amg
