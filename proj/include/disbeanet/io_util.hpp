#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace disbeanet::io {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// Locale-independent strict double parse; throws ParseError on failure.
double parse_double(std::string_view s, const std::string& where);
long parse_long(std::string_view s, const std::string& where);

// Write-then-rename so a rerun never leaves a half-written file behind.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace disbeanet::io
