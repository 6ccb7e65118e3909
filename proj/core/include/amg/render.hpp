#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "amg/layers.hpp"
#include "amg/planner.hpp"

namespace amg {

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // top row first, 3 bytes per pixel

  std::array<std::uint8_t, 3> pixel(int x, int y) const;
};

// Path cells are painted this color; no other overlay pixel can take it
// because non-path pixels always have blue <= red.
inline constexpr std::array<std::uint8_t, 3> kPathColor = {0, 0, 255};

// Cost-kind visualizations of GPR outputs.
GridMap mean_visual(const GridMap& mean);
GridMap variance_visual(const GridMap& variance, double signal_variance);

// Geometric layer in gray (free white, occupied dark), the strongest
// abstraction cost per cell as red tint, and the path cells in kPathColor.
RgbImage compose_overlay(const CostLayer& geometric, const std::vector<const CostLayer*>& abstraction,
                         const Path* path);

// 8-bit RGB PNG without timestamps, so identical input gives identical bytes.
std::vector<std::uint8_t> encode_png(const RgbImage& image);

struct RenderLayer {
  const CostLayer* cost = nullptr;
  const GridMap* mean = nullptr;
  const GridMap* variance = nullptr;
};

struct RenderInputs {
  const CostLayer* geometric = nullptr;
  std::vector<RenderLayer> layers;
  const GridMap* fused = nullptr;
  const Path* path = nullptr;
  double signal_variance = 1.0;
};

// Writes fused.pgm, <tag>_mean.pgm, <tag>_variance.pgm and overlay.png
// (each only when its inputs are present).
void render(const RenderInputs& inputs, const std::filesystem::path& dir);

}  // namespace amg
