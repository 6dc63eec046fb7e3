#pragma once

// Small text helpers shared by the file-format readers and writers.

#include <charconv>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace limbmap::detail {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);
void append_double(std::string& out, double v);

std::optional<double> parse_double(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split_whitespace(std::string_view s);
std::string_view trim(std::string_view s);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace limbmap::detail
