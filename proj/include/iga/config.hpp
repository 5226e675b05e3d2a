#pragma once

#include "iga/eval.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace iga {

/// Model names bound to each role. Without a judge the teacher judges.
struct RoleBindings {
    std::string teacher = "teacher";
    std::string student = "student-base";
    std::vector<std::string> helpers;
    std::optional<std::string> judge;
};

struct BackendSettings {
    std::string kind = "scripted";  // scripted | http
    std::optional<std::filesystem::path> fixtures;
    bool vision = false;
    std::string base_url = "http://localhost:8000/v1";
    int retries = 3;
    int timeout_seconds = 120;
};

/// A run, loaded from one JSON file. Relative paths resolve against the
/// config file's directory.
struct RunConfig {
    std::filesystem::path config_dir;
    std::filesystem::path scenario_path;
    Scenario scenario;
    std::filesystem::path work_dir;
    RoleBindings roles;

    std::uint32_t k = 2;
    std::string modality = "auto";  // auto | text | image
    std::optional<std::filesystem::path> renderer;
    double answer_temperature = 0.7;
    double graph_temperature = 0.0;
    double judge_temperature = 0.0;

    std::uint32_t T = 3;
    std::uint32_t n2 = 3;
    std::uint32_t n3 = 5;
    double stage1_temperature = 0.3;
    double stage23_temperature = 0.8;

    std::uint64_t call_budget = 10'000;
    std::size_t parallelism = 1;
    int max_tokens = 1024;

    std::string trainer_mode = "mock";  // mock | subprocess
    std::optional<std::filesystem::path> trainer_executable;

    std::string templates = "v1";
    std::int64_t seed = 0;
    BackendSettings backend;

    /// The merged configuration (defaults + file + overrides).
    nlohmann::json effective;

    /// SHA-256 of the effective config without work_dir; guards resume.
    std::string digest() const;
};

/// Command-line adjustments layered over the file.
struct ConfigOverrides {
    std::vector<std::string> set;  // dotted "sail.n2=4"
    std::optional<std::filesystem::path> work_dir;
    std::optional<std::string> backend;
    std::optional<std::filesystem::path> fixtures;
};

/// The default configuration; every accepted key appears here.
nlohmann::json default_config();

/// Applies one "dotted.key=value" to `config`. The value is parsed as JSON
/// when possible, else taken as a string. Throws UsageError for keys the
/// schema does not declare.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Errors: ConfigError (bad values, unknown keys, zero training queries),
/// SchemaError (scenario file), UsageError (bad override).
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Builds from an in-memory document; `config_dir` anchors relative paths.
RunConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& config_dir,
                           const ConfigOverrides& overrides = {});

}  // namespace iga
