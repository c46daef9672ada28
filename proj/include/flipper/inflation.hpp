#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "flipper/grid.hpp"
#include "flipper/terrain.hpp"

namespace flipper {

/// Inflated surface D(q): the elevation map raised by a hemisphere of the wheel
/// radius, so a line skeleton touching D is equivalent to the full body touching
/// the terrain. Shares the grid of its source map.
class InflatedMap {
 public:
  InflatedMap() = default;
  InflatedMap(GridGeometry geometry, std::vector<double> values, double source_radius);

  const GridGeometry& geometry() const { return geometry_; }
  std::span<const double> values() const { return values_; }
  double source_radius() const { return source_radius_; }
  double at(std::size_t ix, std::size_t iy) const { return values_[geometry_.index(ix, iy)]; }

  /// Bilinear D at a world point; throws OutOfMapError outside the map.
  double value_at(double x, double y) const {
    return sample_bilinear(geometry_, values_, x, y);
  }

  std::uint64_t hash() const { return grid_hash(geometry_, values_); }

  bool operator==(const InflatedMap& other) const = default;

 private:
  GridGeometry geometry_;
  std::vector<double> values_;
  double source_radius_ = 0.0;
};

/// Hemispherical kernel of radius r sitting on height h, evaluated at offset
/// (dx, dy) from its center: h + sqrt(r^2 - dx^2 - dy^2) on the closed disc,
/// 0 outside it.
double kernel_value(double r, double h, double dx, double dy);

/// D(q) = max over cells p within horizontal distance r of q of
/// kernel_value(r, h(p), q - p). Cells near the border only see in-bounds
/// contributors. Throws InvalidArgument when r <= 0 or r is below one cell.
InflatedMap inflate(const ElevationMap& map, double r);

void save_inflated_map(const InflatedMap& map, const std::filesystem::path& path,
                       MapFormat format);
InflatedMap load_inflated_map(const std::filesystem::path& path, MapFormat format);

}  // namespace flipper
