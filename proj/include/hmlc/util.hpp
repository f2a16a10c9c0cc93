#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hmlc::util {

// Shortest decimal form that parses back to the same double. Locale-independent.
std::string fmt_double(double v);

// General format with a fixed number of significant digits.
std::string fmt_double_sig(double v, int digits);

double parse_double(std::string_view s);
long long parse_ll(std::string_view s);
uint64_t parse_u64(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// Splits on '\n'; a trailing newline does not produce an empty final element.
std::vector<std::string_view> split_lines(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace hmlc::util
