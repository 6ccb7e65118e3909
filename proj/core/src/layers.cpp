#include "amg/layers.hpp"

#include <algorithm>
#include <cmath>

#include "amg/error.hpp"

namespace amg {

double round_half_up(double v) noexcept { return std::floor(v + 0.5 + 1e-9); }

CostLayer occupancy_to_cost(const GridMap& occupancy, int unknown_cost, std::string tag) {
  if (occupancy.kind() != GridKind::occupancy) {
    throw Error(ErrorCode::InvalidKind, "occupancy_to_cost needs an occupancy grid");
  }
  if (unknown_cost < 0 || unknown_cost > 255) {
    throw Error(ErrorCode::InvalidArgument, "unknown_cost must lie in [0, 255]");
  }
  std::vector<double> cost(occupancy.values().size());
  std::transform(occupancy.values().begin(), occupancy.values().end(), cost.begin(), [&](double v) {
    if (v == kOccupancyOccupied) return 255.0;
    if (v == kOccupancyFree) return 0.0;
    return static_cast<double>(unknown_cost);
  });
  return {GridMap(occupancy.geometry(), GridKind::cost, std::move(cost)), std::move(tag),
          LayerRole::geometric};
}

CostLayer mean_to_cost(const GridMap& mean, const GridMap& variance, double kappa,
                       std::string tag) {
  if (mean.kind() != GridKind::mean || variance.kind() != GridKind::variance) {
    throw Error(ErrorCode::InvalidKind, "mean_to_cost needs mean and variance grids");
  }
  if (!(mean.geometry() == variance.geometry())) {
    throw Error(ErrorCode::DimensionMismatch, "mean and variance grids are not aligned");
  }
  if (!std::isfinite(kappa)) throw Error(ErrorCode::InvalidArgument, "kappa must be finite");
  const auto m = mean.values();
  const auto var = variance.values();
  std::vector<double> cost(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double score = m[i] + kappa * std::sqrt(std::max(var[i], 0.0));
    cost[i] = round_half_up(255.0 * std::clamp(score, 0.0, 1.0));
  }
  return {GridMap(mean.geometry(), GridKind::cost, std::move(cost)), std::move(tag),
          LayerRole::abstraction};
}

GridMap fuse(const LayerStack& stack) {
  if (stack.layers.empty()) throw Error(ErrorCode::InvalidArgument, "layer stack is empty");
  if (stack.lethal_threshold < 0 || stack.lethal_threshold > 255) {
    throw Error(ErrorCode::InvalidArgument, "lethal_threshold must lie in [0, 255]");
  }
  const GridGeometry& geometry = stack.layers.front().layer.grid.geometry();
  double weight_sum = 0.0;
  for (const auto& wl : stack.layers) {
    if (!(wl.weight >= 0.0) || !std::isfinite(wl.weight)) {
      throw Error(ErrorCode::InvalidArgument, "weight of layer '" + wl.layer.tag + "' must be >= 0");
    }
    if (wl.layer.grid.kind() != GridKind::cost) {
      throw Error(ErrorCode::InvalidKind, "layer '" + wl.layer.tag + "' is not a cost grid");
    }
    if (!(wl.layer.grid.geometry() == geometry)) {
      throw Error(ErrorCode::AlignmentError, "layer '" + wl.layer.tag + "' is not aligned");
    }
    weight_sum += wl.weight;
  }
  if (!(weight_sum > 0.0)) throw Error(ErrorCode::ZeroWeightSum, "all layer weights are zero");

  const std::size_t n = geometry.cell_count();
  std::vector<double> fused(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool lethal = false;
    double acc = 0.0;
    for (const auto& wl : stack.layers) {
      const double c = wl.layer.grid.values()[i];
      acc += wl.weight * c;
      if (stack.lethal_enabled && wl.layer.role == LayerRole::geometric && c >= stack.lethal_threshold) {
        lethal = true;
      }
    }
    fused[i] = lethal ? 255.0 : std::clamp(round_half_up(acc / weight_sum), 0.0, 255.0);
  }
  return GridMap(geometry, GridKind::cost, std::move(fused));
}

}  // namespace amg
