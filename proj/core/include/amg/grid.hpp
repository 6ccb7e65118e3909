#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace amg {

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

struct GridIndex {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const GridIndex&, const GridIndex&) = default;
};

// Placement of a raster in the world frame. `origin` is the lower-left
// corner of cell (0,0); rows grow with +y and columns with +x.
struct GridGeometry {
  int width = 0;
  int height = 0;
  double resolution = 1.0;
  WorldPoint origin{};

  std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  bool contains(GridIndex idx) const noexcept {
    return idx.row >= 0 && idx.col >= 0 && idx.row < height && idx.col < width;
  }
  bool contains(WorldPoint p) const noexcept;
  std::size_t offset(GridIndex idx) const noexcept {
    return static_cast<std::size_t>(idx.row) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(idx.col);
  }
  GridIndex index_of(std::size_t offset) const noexcept {
    return {static_cast<int>(offset / static_cast<std::size_t>(width)),
            static_cast<int>(offset % static_cast<std::size_t>(width))};
  }

  // Throws OutOfBounds for points outside [origin, origin + size*res).
  GridIndex world_to_grid(WorldPoint p) const;
  // Cell center. Throws OutOfBounds.
  WorldPoint grid_to_world(GridIndex idx) const;

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

enum class GridKind { occupancy, cost, mean, variance };

// Occupancy cell states.
inline constexpr double kOccupancyFree = 0.0;
inline constexpr double kOccupancyOccupied = 1.0;
inline constexpr double kOccupancyUnknown = -1.0;

// Immutable raster. Values are row-major with row 0 at the bottom (min y).
class GridMap {
 public:
  // Validates the geometry and the per-kind value domain.
  GridMap(GridGeometry geometry, GridKind kind, std::vector<double> values);

  static GridMap filled(GridGeometry geometry, GridKind kind, double value);

  const GridGeometry& geometry() const noexcept { return geometry_; }
  GridKind kind() const noexcept { return kind_; }
  int width() const noexcept { return geometry_.width; }
  int height() const noexcept { return geometry_.height; }
  double resolution() const noexcept { return geometry_.resolution; }
  WorldPoint origin() const noexcept { return geometry_.origin; }

  std::span<const double> values() const noexcept { return values_; }
  double at(GridIndex idx) const;
  double operator[](GridIndex idx) const noexcept { return values_[geometry_.offset(idx)]; }

  GridIndex world_to_grid(WorldPoint p) const { return geometry_.world_to_grid(p); }
  WorldPoint grid_to_world(GridIndex idx) const { return geometry_.grid_to_world(idx); }

 private:
  GridGeometry geometry_;
  GridKind kind_;
  std::vector<double> values_;
};

void validate_geometry(const GridGeometry& geometry);

}  // namespace amg
