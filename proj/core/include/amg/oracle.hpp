#pragma once

#include <span>

#include "amg/gpr.hpp"
#include "amg/planner.hpp"

// Brute-force reference implementations used to cross-check the production
// GPR and planner. They deliberately share no numerical or search code with
// gpr.cpp / planner.cpp and are only meant for small instances.
namespace amg::oracle {

inline constexpr std::size_t kMaxGprPoints = 50;
inline constexpr int kMaxPlanCells = 36;

// Posterior by explicit Gauss-Jordan inversion of K + (sigma_n^2 + jitter) I.
// Throws SingularMatrix, InvalidArgument (n > 50) or DimensionMismatch.
Prediction predict(std::span<const WorldPoint> points, std::span<const double> targets,
                   const Hyperparameters& hyper, WorldPoint query);

// Global optimum by depth-first enumeration of simple paths (with cost-bound
// pruning) under the planner's edge model. Maps of at most 36 cells.
// Throws NoPath, StartBlocked, GoalBlocked, OutOfBounds or InvalidArgument.
Path plan(const GridMap& costmap, GridIndex start, GridIndex goal, const PlannerConfig& config = {});

}  // namespace amg::oracle
