#pragma once

#include "iga/gateway.hpp"

#include <json.hpp>

#include <filesystem>
#include <mutex>
#include <regex>
#include <string>
#include <vector>

namespace iga {

/// Deterministic backend driven by a fixture table. Entries are tried
/// top-down against "<system_rule>\n\n<user_content>"; the first entry whose
/// role and matcher both fit supplies the response. An unmatched request
/// throws ScriptMiss.
///
/// Fixture file: JSON array of
///   {"role": "judge", "match": {"substring": "..."} | {"regex": "..."},
///    "response": "..."}
/// `role` is a kind ("student"), a full key ("student@ckpt-1", "helper#0"),
/// "student@*" (any checkpoint-bound student) or "*". Responses may use
/// {{digest}} (first 12 hex digits of the request digest), {{seed}}, and
/// {{1}}..{{9}} for regex capture groups.
class ScriptedBackend final : public Backend {
public:
    struct Entry {
        std::string role;
        bool is_regex = false;
        std::string pattern;
        std::regex compiled;
        std::string response;
    };

    ScriptedBackend(std::vector<Entry> entries, bool vision);

    /// Throws SchemaError naming the offending entry.
    static std::vector<Entry> parse_fixture(const nlohmann::json& fixture);
    static std::shared_ptr<ScriptedBackend> from_json(const nlohmann::json& fixture, bool vision = false);
    static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path, bool vision = false);

    std::string complete(const GenerationRequest& request) override;
    bool supports_vision() const override { return vision_; }

    /// Every request seen so far, in arrival order.
    std::vector<GenerationRequest> requests() const;

private:
    std::vector<Entry> entries_;
    bool vision_;
    mutable std::mutex mutex_;
    std::vector<GenerationRequest> seen_;
};

}  // namespace iga
