#include "amg/grid.hpp"

#include <cmath>
#include <sstream>

#include "amg/error.hpp"

namespace amg {
namespace {

bool finite(WorldPoint p) { return std::isfinite(p.x) && std::isfinite(p.y); }

std::string describe(WorldPoint p) {
  std::ostringstream os;
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

bool valid_value(GridKind kind, double v) {
  switch (kind) {
    case GridKind::occupancy:
      return v == kOccupancyFree || v == kOccupancyOccupied || v == kOccupancyUnknown;
    case GridKind::cost:
      return v >= 0.0 && v <= 255.0 && std::floor(v) == v;
    case GridKind::mean:
    case GridKind::variance:
      return std::isfinite(v);
  }
  return false;
}

}  // namespace

void validate_geometry(const GridGeometry& g) {
  if (g.width <= 0 || g.height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "grid dimensions must be positive");
  }
  if (!(g.resolution > 0.0) || !std::isfinite(g.resolution)) {
    throw Error(ErrorCode::InvalidArgument, "grid resolution must be positive");
  }
  if (!finite(g.origin)) {
    throw Error(ErrorCode::InvalidArgument, "grid origin must be finite");
  }
}

bool GridGeometry::contains(WorldPoint p) const noexcept {
  if (!finite(p)) return false;
  const double c = std::floor((p.x - origin.x) / resolution);
  const double r = std::floor((p.y - origin.y) / resolution);
  return c >= 0.0 && r >= 0.0 && c < width && r < height;
}

GridIndex GridGeometry::world_to_grid(WorldPoint p) const {
  if (!contains(p)) {
    throw Error(ErrorCode::OutOfBounds, "point " + describe(p) + " outside map extent");
  }
  return {static_cast<int>(std::floor((p.y - origin.y) / resolution)),
          static_cast<int>(std::floor((p.x - origin.x) / resolution))};
}

WorldPoint GridGeometry::grid_to_world(GridIndex idx) const {
  if (!contains(idx)) {
    throw Error(ErrorCode::OutOfBounds, "cell (" + std::to_string(idx.row) + ", " +
                                            std::to_string(idx.col) + ") outside grid");
  }
  return {origin.x + (idx.col + 0.5) * resolution, origin.y + (idx.row + 0.5) * resolution};
}

GridMap::GridMap(GridGeometry geometry, GridKind kind, std::vector<double> values)
    : geometry_(geometry), kind_(kind), values_(std::move(values)) {
  validate_geometry(geometry_);
  if (values_.size() != geometry_.cell_count()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(geometry_.cell_count()) + " values, got " +
                    std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!valid_value(kind_, values_[i])) {
      throw Error(ErrorCode::InvalidArgument,
                  "value " + std::to_string(values_[i]) + " at offset " + std::to_string(i) +
                      " not valid for grid kind");
    }
  }
}

GridMap GridMap::filled(GridGeometry geometry, GridKind kind, double value) {
  validate_geometry(geometry);
  return GridMap(geometry, kind, std::vector<double>(geometry.cell_count(), value));
}

double GridMap::at(GridIndex idx) const {
  if (!geometry_.contains(idx)) {
    throw Error(ErrorCode::OutOfBounds, "cell (" + std::to_string(idx.row) + ", " +
                                            std::to_string(idx.col) + ") outside grid");
  }
  return values_[geometry_.offset(idx)];
}

}  // namespace amg
