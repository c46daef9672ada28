#include "flipper/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "flipper/error.hpp"

namespace flipper {

namespace {

// Slack for points that land on the outermost cell centers after rounding.
constexpr double kHullSlack = 1e-9;

}  // namespace

bool GridGeometry::contains(double x, double y) const {
  if (!std::isfinite(x) || !std::isfinite(y)) return false;
  return x >= min_x() - kHullSlack && x <= max_x() + kHullSlack && y >= min_y() - kHullSlack &&
         y <= max_y() + kHullSlack;
}

void GridGeometry::validate() const {
  if (width_cells == 0 || height_cells == 0) {
    throw InvalidArgument("grid must have at least one cell in each direction");
  }
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw InvalidArgument("grid resolution must be positive and finite");
  }
  if (!origin.allFinite()) {
    throw InvalidArgument("grid origin must be finite");
  }
}

double sample_bilinear(const GridGeometry& grid, std::span<const double> values, double x,
                       double y) {
  if (!grid.contains(x, y)) {
    std::ostringstream os;
    os << "point (" << x << ", " << y << ") is outside the map";
    throw OutOfMapError(os.str());
  }

  auto locate = [](double coord, double origin, double res, std::size_t cells, std::size_t& i0,
                   double& frac) {
    if (cells == 1) {
      i0 = 0;
      frac = 0.0;
      return;
    }
    const double u = std::clamp((coord - origin) / res, 0.0, static_cast<double>(cells - 1));
    double fl = std::floor(u);
    if (fl >= static_cast<double>(cells - 1)) fl = static_cast<double>(cells - 2);
    i0 = static_cast<std::size_t>(fl);
    frac = u - fl;
  };

  std::size_t ix = 0;
  std::size_t iy = 0;
  double fx = 0.0;
  double fy = 0.0;
  locate(x, grid.origin.x(), grid.resolution, grid.width_cells, ix, fx);
  locate(y, grid.origin.y(), grid.resolution, grid.height_cells, iy, fy);

  const std::size_t ix1 = grid.width_cells == 1 ? ix : ix + 1;
  const std::size_t iy1 = grid.height_cells == 1 ? iy : iy + 1;

  const double v00 = values[grid.index(ix, iy)];
  const double v10 = values[grid.index(ix1, iy)];
  const double v01 = values[grid.index(ix, iy1)];
  const double v11 = values[grid.index(ix1, iy1)];

  // a + f * (b - a) keeps constant patches exact.
  const double low = v00 + fx * (v10 - v00);
  const double high = v01 + fx * (v11 - v01);
  return low + fy * (high - low);
}

std::uint64_t grid_hash(const GridGeometry& grid, std::span<const double> values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int b = 0; b < 8; ++b) {
      h ^= (word >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(grid.width_cells);
  mix(grid.height_cells);
  mix(std::bit_cast<std::uint64_t>(grid.resolution));
  mix(std::bit_cast<std::uint64_t>(grid.origin.x()));
  mix(std::bit_cast<std::uint64_t>(grid.origin.y()));
  for (double v : values) mix(std::bit_cast<std::uint64_t>(v));
  return h;
}

}  // namespace flipper
