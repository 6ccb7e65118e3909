#pragma once

#include <string>
#include <vector>

#include "amg/grid.hpp"

namespace amg {

enum class LayerRole { geometric, abstraction };

struct CostLayer {
  GridMap grid;  // cost kind, integers 0..255
  std::string tag;
  LayerRole role = LayerRole::abstraction;
};

inline constexpr int kDefaultUnknownCost = 128;
inline constexpr int kLethalCost = 255;

// Round half up, tolerant of representation error at exact halves
// (255 * 0.7 must give 179).
double round_half_up(double v) noexcept;

// occupied -> 255, free -> 0, unknown -> unknown_cost.
CostLayer occupancy_to_cost(const GridMap& occupancy, int unknown_cost = kDefaultUnknownCost,
                            std::string tag = "geometric");

// round(255 * clamp(mean + kappa * sqrt(variance), 0, 1)). kappa = 0 is the
// plain mean map; kappa > 0 penalizes uncertain cells.
CostLayer mean_to_cost(const GridMap& mean, const GridMap& variance, double kappa,
                       std::string tag);

struct WeightedLayer {
  CostLayer layer;
  double weight = 1.0;
};

struct LayerStack {
  std::vector<WeightedLayer> layers;
  bool lethal_enabled = true;
  int lethal_threshold = kLethalCost;
};

// Per cell: round(sum w_i c_i / sum w_i). With lethal_enabled, any geometric
// layer at or above lethal_threshold forces 255 regardless of weights.
// Throws AlignmentError, ZeroWeightSum or InvalidArgument.
GridMap fuse(const LayerStack& stack);

}  // namespace amg
