#include "grid_io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "flipper/error.hpp"
#include "io_util.hpp"

namespace flipper::detail {

namespace {

struct Header {
  std::optional<std::size_t> width;
  std::optional<std::size_t> height;
  std::optional<double> resolution;
  std::optional<Eigen::Vector2d> origin;
  std::optional<double> source_radius;
};

void parse_header_tokens(std::string_view line, Header& header, const std::string& source,
                         std::size_t line_no) {
  for (std::string_view token : split(line, " \t\r")) {
    const auto eq = token.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source, line_no, "expected key=value in header, got '" +
                                            std::string(token) + "'");
    }
    const std::string_view key = token.substr(0, eq);
    const std::string_view value = token.substr(eq + 1);
    if (key == "width") {
      header.width = parse_count(value, source, line_no);
    } else if (key == "height") {
      header.height = parse_count(value, source, line_no);
    } else if (key == "resolution") {
      header.resolution = parse_double(value, source, line_no);
    } else if (key == "origin") {
      const auto parts = split(value, ",");
      if (parts.size() != 2) {
        throw ParseError(source, line_no, "origin must be '<x>,<y>'");
      }
      header.origin = Eigen::Vector2d(parse_double(parts[0], source, line_no),
                                      parse_double(parts[1], source, line_no));
    } else if (key == "source_radius") {
      header.source_radius = parse_double(value, source, line_no);
    } else {
      throw ParseError(source, line_no, "unknown header key '" + std::string(key) + "'");
    }
  }
}

bool is_ascii_header_line(std::string_view line) {
  const auto tokens = split(line, " \t\r");
  return !tokens.empty() && tokens.front().find('=') != std::string_view::npos;
}

}  // namespace

GridFile parse_grid(std::istream& in, const std::string& source, MapFormat format) {
  Header header;
  GridFile file;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t rows_read = 0;
  bool header_done = false;

  auto finish_header = [&](std::size_t at_line) {
    if (!header.width || !header.height || !header.resolution || !header.origin) {
      throw ParseError(source, at_line,
                       "header must declare width, height, resolution and origin");
    }
    file.geometry.width_cells = *header.width;
    file.geometry.height_cells = *header.height;
    file.geometry.resolution = *header.resolution;
    file.geometry.origin = *header.origin;
    file.source_radius = header.source_radius;
    try {
      file.geometry.validate();
    } catch (const InvalidArgument& e) {
      throw ParseError(source, at_line, e.what());
    }
    file.values.reserve(file.geometry.cell_count());
    header_done = true;
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    if (format == MapFormat::Csv && line.front() == '#') {
      if (header_done) throw ParseError(source, line_no, "header line after data rows");
      parse_header_tokens(line.substr(1), header, source, line_no);
      continue;
    }
    if (format == MapFormat::AsciiGrid && !header_done && is_ascii_header_line(line)) {
      parse_header_tokens(line, header, source, line_no);
      continue;
    }

    if (!header_done) finish_header(line_no);
    if (rows_read == file.geometry.height_cells) {
      throw ParseError(source, line_no,
                       "dimension mismatch: more than " +
                           std::to_string(file.geometry.height_cells) + " rows");
    }
    const auto fields = split(line, format == MapFormat::Csv ? "," : " \t\r");
    if (fields.size() != file.geometry.width_cells) {
      throw ParseError(source, line_no,
                       "dimension mismatch: expected " +
                           std::to_string(file.geometry.width_cells) + " values, got " +
                           std::to_string(fields.size()));
    }
    for (std::string_view field : fields) {
      const double v = parse_double(trim(field), source, line_no);
      if (!std::isfinite(v)) throw ParseError(source, line_no, "non-finite height");
      file.values.push_back(v);
    }
    ++rows_read;
  }

  if (!header_done) finish_header(line_no + 1);
  if (rows_read != file.geometry.height_cells) {
    throw ParseError(source, line_no + 1,
                     "dimension mismatch: expected " +
                         std::to_string(file.geometry.height_cells) + " rows, got " +
                         std::to_string(rows_read));
  }
  return file;
}

GridFile read_grid_file(const std::filesystem::path& path, MapFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_grid(in, path.string(), format);
}

void write_grid(std::ostream& out, MapFormat format, const GridGeometry& geometry,
                std::span<const double> values, std::optional<double> source_radius) {
  if (format == MapFormat::Csv) out << "# ";
  out << "width=" << geometry.width_cells << " height=" << geometry.height_cells
      << " resolution=" << format_double(geometry.resolution)
      << " origin=" << format_double(geometry.origin.x()) << ','
      << format_double(geometry.origin.y());
  if (source_radius) out << " source_radius=" << format_double(*source_radius);
  out << '\n';

  const char sep = format == MapFormat::Csv ? ',' : ' ';
  for (std::size_t iy = 0; iy < geometry.height_cells; ++iy) {
    for (std::size_t ix = 0; ix < geometry.width_cells; ++ix) {
      if (ix > 0) out << sep;
      out << format_double(values[geometry.index(ix, iy)]);
    }
    out << '\n';
  }
}

void write_grid_file(const std::filesystem::path& path, MapFormat format,
                     const GridGeometry& geometry, std::span<const double> values,
                     std::optional<double> source_radius) {
  write_file_atomically(path, [&](std::ostream& out) {
    write_grid(out, format, geometry, values, source_radius);
  });
}

}  // namespace flipper::detail
