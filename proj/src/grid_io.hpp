#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flipper/grid.hpp"
#include "flipper/terrain.hpp"

namespace flipper::detail {

struct GridFile {
  GridGeometry geometry;
  std::vector<double> values;
  std::optional<double> source_radius;
};

GridFile parse_grid(std::istream& in, const std::string& source, MapFormat format);
GridFile read_grid_file(const std::filesystem::path& path, MapFormat format);

void write_grid(std::ostream& out, MapFormat format, const GridGeometry& geometry,
                std::span<const double> values, std::optional<double> source_radius);
void write_grid_file(const std::filesystem::path& path, MapFormat format,
                     const GridGeometry& geometry, std::span<const double> values,
                     std::optional<double> source_radius);

}  // namespace flipper::detail
