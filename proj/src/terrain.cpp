#include "flipper/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flipper/error.hpp"
#include "grid_io.hpp"

namespace flipper {

MapFormat map_format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? MapFormat::Csv : MapFormat::AsciiGrid;
}

ElevationMap::ElevationMap(GridGeometry geometry, std::vector<double> heights)
    : geometry_(std::move(geometry)), heights_(std::move(heights)) {
  geometry_.validate();
  if (heights_.size() != geometry_.cell_count()) {
    throw InvalidArgument("heights length " + std::to_string(heights_.size()) +
                          " does not match " + std::to_string(geometry_.width_cells) + "x" +
                          std::to_string(geometry_.height_cells));
  }
  for (double h : heights_) {
    if (!std::isfinite(h)) throw InvalidArgument("elevation map heights must be finite");
  }
}

ElevationMap ElevationMap::flat(std::size_t width_cells, std::size_t height_cells,
                                double resolution, Eigen::Vector2d origin, double height) {
  GridGeometry g{width_cells, height_cells, resolution, origin};
  return ElevationMap(g, std::vector<double>(g.cell_count(), height));
}

double ElevationMap::height_at(double x, double y) const {
  return sample_bilinear(geometry_, heights_, x, y);
}

ElevationMap ElevationMap::mirrored_y() const {
  std::vector<double> out(heights_.size());
  const std::size_t h = geometry_.height_cells;
  for (std::size_t iy = 0; iy < h; ++iy) {
    for (std::size_t ix = 0; ix < geometry_.width_cells; ++ix) {
      out[geometry_.index(ix, h - 1 - iy)] = heights_[geometry_.index(ix, iy)];
    }
  }
  GridGeometry g = geometry_;
  // Reflected span is [-max_y, -min_y]; a y-centered grid keeps its origin bit-exact.
  if (std::abs(geometry_.min_y() + geometry_.max_y()) > 1e-12) g.origin.y() = -geometry_.max_y();
  return ElevationMap(g, std::move(out));
}

ElevationMap load_map(const std::filesystem::path& path, MapFormat format) {
  auto file = detail::read_grid_file(path, format);
  if (file.source_radius) {
    throw ParseError(path.string(), 1,
                     "file is an inflated map (source_radius present), expected an elevation map");
  }
  try {
    return ElevationMap(file.geometry, std::move(file.values));
  } catch (const InvalidArgument& e) {
    throw ParseError(path.string(), 1, e.what());
  }
}

void save_map(const ElevationMap& map, const std::filesystem::path& path, MapFormat format) {
  detail::write_grid_file(path, format, map.geometry(), map.heights(), std::nullopt);
}

std::string_view to_string(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::Step:
      return "step";
    case ObstacleKind::Ramp:
      return "ramp";
    case ObstacleKind::InverseRamp:
      return "iramp";
  }
  return "step";
}

ObstacleKind parse_obstacle_kind(std::string_view name) {
  if (name == "step") return ObstacleKind::Step;
  if (name == "ramp") return ObstacleKind::Ramp;
  if (name == "iramp") return ObstacleKind::InverseRamp;
  throw InvalidArgument("unknown obstacle kind '" + std::string(name) +
                        "' (expected step, ramp or iramp)");
}

void ObstacleSpec::validate() const {
  if (!(rotation_deg >= 0.0 && rotation_deg < 90.0)) {
    throw InvalidArgument("rotation_deg must lie in [0, 90)");
  }
  if (!(axis_distance > 0.0)) throw InvalidArgument("axis_distance must be > 0");
  if (!(obstacle_height > 0.0)) throw InvalidArgument("obstacle_height must be > 0");
  if (kind != ObstacleKind::Step && !(slope_run > 0.0)) {
    throw InvalidArgument("slope_run must be > 0 for ramps");
  }
  if (!(resolution > 0.0)) throw InvalidArgument("resolution must be > 0");
  if (!(rear_margin >= 0.0)) throw InvalidArgument("rear_margin must be >= 0");
  if (!(map_extent.x() >= 2.0 * resolution && map_extent.y() >= 2.0 * resolution)) {
    throw InvalidArgument("map_extent must span at least two cells in each direction");
  }
}

GridGeometry obstacle_grid(const ObstacleSpec& spec) {
  GridGeometry g;
  g.resolution = spec.resolution;
  g.width_cells = static_cast<std::size_t>(std::llround(spec.map_extent.x() / spec.resolution));
  g.height_cells = static_cast<std::size_t>(std::llround(spec.map_extent.y() / spec.resolution));
  g.origin = {-spec.rear_margin,
              -0.5 * static_cast<double>(g.height_cells - 1) * spec.resolution};
  return g;
}

double obstacle_profile(const ObstacleSpec& spec, double u) {
  if (u < 0.0) return 0.0;
  switch (spec.kind) {
    case ObstacleKind::Step:
      return spec.obstacle_height;
    case ObstacleKind::Ramp:
      return u >= spec.slope_run ? spec.obstacle_height
                                 : spec.obstacle_height * (u / spec.slope_run);
    case ObstacleKind::InverseRamp:
      return u >= spec.slope_run ? 0.0
                                 : spec.obstacle_height * (1.0 - u / spec.slope_run);
  }
  return 0.0;
}

ElevationMap generate_obstacle(const ObstacleSpec& spec) {
  spec.validate();
  const GridGeometry g = obstacle_grid(spec);

  const double rho = spec.rotation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rho);
  const double s = std::sin(rho);

  // The footprint (axis point and, for ramps, the far end of the slope along the
  // feature normal) must be on the map.
  const Eigen::Vector2d axis(spec.axis_distance, 0.0);
  if (!g.contains(axis.x(), axis.y())) {
    throw InvalidArgument("obstacle rotation axis lies outside map_extent");
  }
  if (spec.kind != ObstacleKind::Step) {
    const Eigen::Vector2d far = axis + spec.slope_run * Eigen::Vector2d(c, -s);
    if (!g.contains(far.x(), far.y())) {
      throw InvalidArgument("obstacle slope footprint exceeds map_extent");
    }
  }

  std::vector<double> heights(g.cell_count());
  for (std::size_t iy = 0; iy < g.height_cells; ++iy) {
    for (std::size_t ix = 0; ix < g.width_cells; ++ix) {
      const Eigen::Vector2d p = g.cell_center(ix, iy);
      // Signed distance past the feature line; the normal (cos, -sin) is +x
      // rotated clockwise, so the right side (y < 0) meets the feature first.
      const double u = (p.x() - axis.x()) * c - p.y() * s;
      heights[g.index(ix, iy)] = obstacle_profile(spec, u);
    }
  }
  return ElevationMap(g, std::move(heights));
}

}  // namespace flipper
