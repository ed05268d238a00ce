#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ratedml::csv {

/// Comma-separated table as raw strings. Fields are unquoted; schemas used by
/// this project never contain commas inside a field.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// 1-based file line number of each data row, for error messages.
    std::vector<std::size_t> line_numbers;
};

/// Reads a file; throws Error{Io} if missing and Error{MalformedRow} on
/// ragged rows. Blank lines are skipped; a trailing '\r' is stripped.
Table read(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

/// Shortest representation that round-trips to the same double.
std::string format_double(double value);

/// Strict decimal parse of the whole field; nullopt on failure.
std::optional<double> parse_double(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Writes `content` to `path`, throwing Error{Io} on failure.
void write_file(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace ratedml::csv
