#include "amg/oracle.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "amg/error.hpp"

namespace amg::oracle {
namespace {

using Matrix = std::vector<std::vector<double>>;

double kernel(WorldPoint a, WorldPoint b, const Hyperparameters& h) {
  const double d2 = std::pow(a.x - b.x, 2) + std::pow(a.y - b.y, 2);
  return h.signal_variance * std::exp(-d2 / (2.0 * h.lengthscale * h.lengthscale));
}

// Gauss-Jordan with partial pivoting.
Matrix invert(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  double scale = 0.0;
  for (const auto& row : a) {
    for (double v : row) scale = std::max(scale, std::abs(v));
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) <= 1e-13 * scale) {
      throw Error(ErrorCode::SingularMatrix, "pivot vanished in column " + std::to_string(col));
    }
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    const double p = a[col][col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] /= p;
      inv[col][k] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

}  // namespace

Prediction predict(std::span<const WorldPoint> points, std::span<const double> targets,
                   const Hyperparameters& hyper, WorldPoint query) {
  if (points.size() != targets.size() || points.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "oracle needs matching, nonempty inputs");
  }
  if (points.size() > kMaxGprPoints) {
    throw Error(ErrorCode::InvalidArgument, "oracle limited to 50 training points");
  }
  const std::size_t n = points.size();
  Matrix k(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) k[i][j] = kernel(points[i], points[j], hyper);
    k[i][i] += hyper.noise_variance + hyper.jitter;
  }
  const Matrix inv = invert(std::move(k));

  std::vector<double> ks(n);
  for (std::size_t i = 0; i < n; ++i) ks[i] = kernel(query, points[i], hyper);

  double mean = 0.0;
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_y = 0.0;
    double row_k = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      row_y += inv[i][j] * targets[j];
      row_k += inv[i][j] * ks[j];
    }
    mean += ks[i] * row_y;
    quad += ks[i] * row_k;
  }
  const double variance = kernel(query, query, hyper) - quad;
  return {mean, std::max(variance, kVarianceFloor)};
}

namespace {

struct Search {
  const GridMap& map;
  const PlannerConfig& cfg;
  int goal;
  int width;
  int height;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_cells;
  std::vector<int> stack;

  bool open(int r, int c) const {
    return r >= 0 && c >= 0 && r < height && c < width &&
           map.values()[static_cast<std::size_t>(r * width + c)] < cfg.impassable_threshold;
  }

  double cost(int cell) const { return map.values()[static_cast<std::size_t>(cell)]; }

  void dfs(int cell, std::uint64_t visited, double so_far) {
    if (so_far >= best) return;
    if (cell == goal) {
      best = so_far;
      best_cells = stack;
      return;
    }
    const int r = cell / width;
    const int c = cell % width;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const bool diag = dr != 0 && dc != 0;
        if (diag && cfg.connectivity == Connectivity::four) continue;
        const int nr = r + dr;
        const int nc = c + dc;
        if (!open(nr, nc)) continue;
        if (diag && !(open(r + dr, c) && open(r, c + dc))) continue;
        const int next = nr * width + nc;
        if (visited & (std::uint64_t{1} << next)) continue;
        const double step = diag ? std::sqrt(2.0) : 1.0;
        // Same edge model as the planner, written out independently.
        const double e = step * (1.0 + cfg.traversal_gamma * (cost(cell) + cost(next)) / (2.0 * 255.0));
        stack.push_back(next);
        dfs(next, visited | (std::uint64_t{1} << next), so_far + e);
        stack.pop_back();
      }
    }
  }
};

}  // namespace

Path plan(const GridMap& costmap, GridIndex start, GridIndex goal, const PlannerConfig& config) {
  config.validate();
  const int w = costmap.width();
  const int h = costmap.height();
  if (w * h > kMaxPlanCells) throw Error(ErrorCode::InvalidArgument, "oracle limited to 36 cells");
  const auto inside = [&](GridIndex i) { return i.row >= 0 && i.col >= 0 && i.row < h && i.col < w; };
  if (!inside(start) || !inside(goal)) throw Error(ErrorCode::OutOfBounds, "start/goal outside map");
  Search s{costmap, config, goal.row * w + goal.col, w, h, std::numeric_limits<double>::infinity(), {}, {}};
  const int s_cell = start.row * w + start.col;
  if (!s.open(start.row, start.col)) throw Error(ErrorCode::StartBlocked, "start impassable");
  if (!s.open(goal.row, goal.col)) throw Error(ErrorCode::GoalBlocked, "goal impassable");
  s.stack.push_back(s_cell);
  s.dfs(s_cell, std::uint64_t{1} << s_cell, 0.0);
  if (s.best_cells.empty()) throw Error(ErrorCode::NoPath, "oracle found no path");

  Path path;
  path.total_cost = s.best;
  for (int cell : s.best_cells) {
    path.cells.push_back({cell / w, cell % w});
  }
  for (std::size_t i = 1; i < path.cells.size(); ++i) {
    const bool diag = path.cells[i].row != path.cells[i - 1].row &&
                      path.cells[i].col != path.cells[i - 1].col;
    path.length_m += (diag ? std::sqrt(2.0) : 1.0) * costmap.resolution();
  }
  return path;
}

}  // namespace amg::oracle
