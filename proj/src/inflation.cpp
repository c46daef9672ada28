#include "flipper/inflation.hpp"

#include <cmath>
#include <limits>

#include "flipper/error.hpp"
#include "grid_io.hpp"

namespace flipper {

InflatedMap::InflatedMap(GridGeometry geometry, std::vector<double> values, double source_radius)
    : geometry_(std::move(geometry)), values_(std::move(values)), source_radius_(source_radius) {
  geometry_.validate();
  if (values_.size() != geometry_.cell_count()) {
    throw InvalidArgument("inflated map size does not match its grid");
  }
  if (!(source_radius_ > 0.0)) throw InvalidArgument("source_radius must be > 0");
}

double kernel_value(double r, double h, double dx, double dy) {
  const double d2 = dx * dx + dy * dy;
  if (d2 > r * r) return 0.0;
  return h + std::sqrt(r * r - dx * dx - dy * dy);
}

namespace {

struct StampEntry {
  std::ptrdiff_t di;
  std::ptrdiff_t dj;
  double rise;  // sqrt(r^2 - dx^2 - dy^2), the kernel height above its base
};

std::vector<StampEntry> make_stamp(double r, double res) {
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(r / res));
  std::vector<StampEntry> stamp;
  for (std::ptrdiff_t dj = -reach; dj <= reach; ++dj) {
    for (std::ptrdiff_t di = -reach; di <= reach; ++di) {
      const double dx = static_cast<double>(di) * res;
      const double dy = static_cast<double>(dj) * res;
      if (dx * dx + dy * dy > r * r) continue;
      stamp.push_back({di, dj, std::sqrt(r * r - dx * dx - dy * dy)});
    }
  }
  return stamp;
}

}  // namespace

InflatedMap inflate(const ElevationMap& map, double r) {
  const GridGeometry& g = map.geometry();
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("inflation radius must be > 0");
  if (r < g.resolution) {
    throw InvalidArgument("inflation radius must span at least one cell");
  }

  const auto stamp = make_stamp(r, g.resolution);
  const auto w = static_cast<std::ptrdiff_t>(g.width_cells);
  const auto h = static_cast<std::ptrdiff_t>(g.height_cells);
  const auto heights = map.heights();

  std::vector<double> out(g.cell_count());
  for (std::ptrdiff_t qy = 0; qy < h; ++qy) {
    for (std::ptrdiff_t qx = 0; qx < w; ++qx) {
      double best = -std::numeric_limits<double>::infinity();
      for (const StampEntry& e : stamp) {
        // Contributor p = q - (di, dj), so q - p = (di, dj) cells.
        const std::ptrdiff_t px = qx - e.di;
        const std::ptrdiff_t py = qy - e.dj;
        if (px < 0 || py < 0 || px >= w || py >= h) continue;
        const double v = heights[static_cast<std::size_t>(py * w + px)] + e.rise;
        if (v > best) best = v;
      }
      out[static_cast<std::size_t>(qy * w + qx)] = best;
    }
  }
  return InflatedMap(g, std::move(out), r);
}

void save_inflated_map(const InflatedMap& map, const std::filesystem::path& path,
                       MapFormat format) {
  detail::write_grid_file(path, format, map.geometry(), map.values(), map.source_radius());
}

InflatedMap load_inflated_map(const std::filesystem::path& path, MapFormat format) {
  auto file = detail::read_grid_file(path, format);
  if (!file.source_radius) {
    throw ParseError(path.string(), 1, "inflated map header lacks source_radius");
  }
  try {
    return InflatedMap(file.geometry, std::move(file.values), *file.source_radius);
  } catch (const InvalidArgument& e) {
    throw ParseError(path.string(), 1, e.what());
  }
}

}  // namespace flipper
