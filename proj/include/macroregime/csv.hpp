#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace macroregime::csv {

/// Splits one CSV line on commas. Quoted fields are not supported; none of our formats need them.
std::vector<std::string> split_line(std::string_view line);

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Shortest round-trippable text for a double ("NaN" for missing).
std::string format_double(double v);

/// Strict double parse of a whole field. Returns false for blank or malformed text.
bool parse_double(std::string_view field, double& out);

std::string_view trim(std::string_view s);

/// Opens a file for writing, creating parent directories.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace macroregime::csv
