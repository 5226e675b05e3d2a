#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace iga::text {

std::string trim(std::string_view s);

/// Trims and collapses internal whitespace runs to one space.
std::string normalize_space(std::string_view s);

std::string to_lower(std::string_view s);

/// Three-way ASCII case-insensitive comparison.
int compare_ci(std::string_view a, std::string_view b);

bool contains_ci(std::string_view haystack, std::string_view needle);

std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// 64-bit FNV-1a; stable across platforms, used for derived sampling seeds.
std::uint64_t fnv1a64(std::string_view bytes);

std::string base64_encode(std::string_view bytes);

/// Fixed-point rendering with exactly `decimals` digits after the point.
std::string fixed(double value, int decimals);

}  // namespace iga::text
