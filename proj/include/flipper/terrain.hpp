#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "flipper/grid.hpp"

namespace flipper {

enum class MapFormat { AsciiGrid, Csv };

/// `.csv` selects Csv, anything else AsciiGrid.
MapFormat map_format_from_path(const std::filesystem::path& path);

/// Uniform 2.5D height grid h(p). Immutable once constructed.
class ElevationMap {
 public:
  ElevationMap() = default;

  /// Throws InvalidArgument on a bad grid, a size mismatch or a non-finite height.
  ElevationMap(GridGeometry geometry, std::vector<double> heights);

  static ElevationMap flat(std::size_t width_cells, std::size_t height_cells, double resolution,
                           Eigen::Vector2d origin, double height = 0.0);

  const GridGeometry& geometry() const { return geometry_; }
  std::span<const double> heights() const { return heights_; }
  double at(std::size_t ix, std::size_t iy) const { return heights_[geometry_.index(ix, iy)]; }

  /// Bilinear height at a world point; throws OutOfMapError outside the map.
  double height_at(double x, double y) const;

  /// Reflection across the world x-z plane (y -> -y): rows reversed, origin moved so
  /// the reflected grid covers [-max_y, -min_y].
  ElevationMap mirrored_y() const;

  std::uint64_t hash() const { return grid_hash(geometry_, heights_); }

  bool operator==(const ElevationMap& other) const = default;

 private:
  GridGeometry geometry_;
  std::vector<double> heights_;
};

ElevationMap load_map(const std::filesystem::path& path, MapFormat format);
void save_map(const ElevationMap& map, const std::filesystem::path& path, MapFormat format);

enum class ObstacleKind { Step, Ramp, InverseRamp };

std::string_view to_string(ObstacleKind kind);
/// Accepts "step", "ramp", "iramp".
ObstacleKind parse_obstacle_kind(std::string_view name);

/// A planar obstacle feature in front of the robot, rotated clockwise (seen from
/// above) about a vertical axis at (axis_distance, 0). The robot's start
/// reference S_middle,2 sits at the world origin facing +x.
struct ObstacleSpec {
  ObstacleKind kind = ObstacleKind::Step;
  double rotation_deg = 0.0;
  double axis_distance = 0.54;
  double obstacle_height = 0.06;
  double slope_run = 0.30;
  Eigen::Vector2d map_extent{1.0, 0.6};
  double resolution = 0.005;
  /// Length of map kept behind the start reference (rear flipper reach).
  double rear_margin = 0.12;

  void validate() const;
};

/// Grid the generator uses for `spec`: origin x = -rear_margin, rows centered on y = 0.
GridGeometry obstacle_grid(const ObstacleSpec& spec);

/// Height profile as a function of the signed distance `u` past the feature line.
double obstacle_profile(const ObstacleSpec& spec, double u);

/// Every cell takes the profile value at its center's signed distance, so boundary
/// cells belong to whichever half-plane contains their center.
ElevationMap generate_obstacle(const ObstacleSpec& spec);

}  // namespace flipper
