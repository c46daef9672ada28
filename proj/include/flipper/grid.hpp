#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Core>

namespace flipper {

/// Shape of a uniform 2.5D grid. Cell (ix, iy) has its center at
/// origin + (ix, iy) * resolution; values are stored row-major (iy outer).
struct GridGeometry {
  std::size_t width_cells = 0;
  std::size_t height_cells = 0;
  double resolution = 0.005;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();

  std::size_t cell_count() const { return width_cells * height_cells; }
  std::size_t index(std::size_t ix, std::size_t iy) const { return iy * width_cells + ix; }

  Eigen::Vector2d cell_center(std::size_t ix, std::size_t iy) const {
    return {origin.x() + static_cast<double>(ix) * resolution,
            origin.y() + static_cast<double>(iy) * resolution};
  }

  double min_x() const { return origin.x(); }
  double min_y() const { return origin.y(); }
  double max_x() const { return origin.x() + static_cast<double>(width_cells - 1) * resolution; }
  double max_y() const { return origin.y() + static_cast<double>(height_cells - 1) * resolution; }

  /// True when (x, y) lies inside the hull of cell centers, where bilinear
  /// sampling is defined.
  bool contains(double x, double y) const;

  /// Throws InvalidArgument unless the grid is non-empty with resolution > 0.
  void validate() const;

  bool operator==(const GridGeometry& other) const {
    return width_cells == other.width_cells && height_cells == other.height_cells &&
           resolution == other.resolution && origin == other.origin;
  }
};

/// Bilinear interpolation of row-major cell values at a world point.
/// Throws OutOfMapError when the point is outside the cell-center hull.
double sample_bilinear(const GridGeometry& grid, std::span<const double> values, double x,
                       double y);

/// FNV-1a over the grid shape and the bit patterns of every value.
std::uint64_t grid_hash(const GridGeometry& grid, std::span<const double> values);

}  // namespace flipper
