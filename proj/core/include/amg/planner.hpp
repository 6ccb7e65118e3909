#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "amg/grid.hpp"

namespace amg {

enum class Connectivity { four, eight };

struct PlannerConfig {
  Connectivity connectivity = Connectivity::eight;
  // Strength of cost avoidance; 0 gives plain shortest distance.
  double traversal_gamma = 10.0;
  // Cells at or above this cost are never entered.
  int impassable_threshold = 255;

  void validate() const;
};

struct Path {
  std::vector<GridIndex> cells;
  double total_cost = 0.0;
  double length_m = 0.0;
};

// Cost of moving between adjacent cells with costs `from` and `to`;
// `step` is 1 or sqrt(2) in cell units:
//   step * (1 + gamma * (from + to) / (2 * 255))
double edge_cost(double step, double from, double to, double gamma) noexcept;

// Dijkstra over the cost grid. Diagonal steps may not cut the corner of an
// impassable cell. Equal-cost frontier entries pop in (row, col) order and a
// parent changes only on strict improvement, so output is deterministic.
// Throws OutOfBounds, StartBlocked, GoalBlocked or NoPath.
Path plan(const GridMap& costmap, GridIndex start, GridIndex goal, const PlannerConfig& config = {});

// Recomputes cost and length along `cells` under the edge model; throws
// InvalidArgument if two consecutive cells are not adjacent.
Path evaluate_path(const GridMap& costmap, std::vector<GridIndex> cells, const PlannerConfig& config);

// "row,col,world_x,world_y" per cell, then "total_cost=...,length_m=...".
std::string format_path(const GridMap& costmap, const Path& path);
void write_path(const GridMap& costmap, const Path& path, const std::filesystem::path& file);
Path read_path(const std::filesystem::path& file);

}  // namespace amg
