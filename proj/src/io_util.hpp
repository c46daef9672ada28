#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace flipper::detail {

/// Shortest decimal that parses back to the identical double.
std::string format_double(double value);

/// Parses a full token as a double; throws ParseError(source, line) otherwise.
double parse_double(std::string_view token, const std::string& source, std::size_t line);

/// Parses a full token as a non-negative integer.
std::size_t parse_count(std::string_view token, const std::string& source, std::size_t line);

/// Splits on any of `separators`, dropping empty fields.
std::vector<std::string_view> split(std::string_view text, std::string_view separators);

std::string_view trim(std::string_view text);

/// Streams content into `<path>.tmp`, then renames over `path`. No partial file
/// is left behind on failure. Throws IoError.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& writer);

}  // namespace flipper::detail
