#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace iga {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Each non-blank line parsed as JSON; throws std::runtime_error naming the line.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

std::string to_jsonl(const std::vector<nlohmann::json>& rows);

}  // namespace iga
