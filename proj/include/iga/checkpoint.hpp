#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace iga {

/// What a finished SFT job leaves behind. `example_count` is the line count
/// of the training JSONL and `dataset_digest` its SHA-256.
struct CheckpointManifest {
    std::string checkpoint_id;
    std::string base_model;
    std::string dataset_digest;
    std::uint64_t example_count = 0;
    nlohmann::json trainer_metadata = nlohmann::json::object();

    nlohmann::json to_json() const;
    /// Throws TrainerFailure on missing or mistyped fields.
    static CheckpointManifest from_json(const nlohmann::json& j);

    friend bool operator==(const CheckpointManifest&, const CheckpointManifest&) = default;
};

/// Directory of `<root>/<checkpoint_id>/manifest.json`. The gateway only
/// accepts checkpoints that have a manifest here.
class CheckpointStore {
public:
    explicit CheckpointStore(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::filesystem::path directory_for(const std::string& checkpoint_id) const;

    bool contains(const std::string& checkpoint_id) const;
    std::optional<CheckpointManifest> load(const std::string& checkpoint_id) const;
    void save(const CheckpointManifest& manifest) const;

private:
    std::filesystem::path root_;
};

/// Checkpoint ids double as directory names.
bool is_valid_checkpoint_id(const std::string& id);

}  // namespace iga
