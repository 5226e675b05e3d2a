#include "iga/checkpoint.hpp"

#include "iga/error.hpp"
#include "iga/fsutil.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace iga {

namespace fs = std::filesystem;

bool is_valid_checkpoint_id(const std::string& id) {
    if (id.empty() || id == "." || id == "..") return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    });
}

nlohmann::json CheckpointManifest::to_json() const {
    return {{"checkpoint_id", checkpoint_id},
            {"base_model", base_model},
            {"dataset_digest", dataset_digest},
            {"example_count", example_count},
            {"trainer_metadata", trainer_metadata}};
}

CheckpointManifest CheckpointManifest::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw TrainerFailure("manifest is not a JSON object");
    auto str = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
            throw TrainerFailure(std::string("manifest field '") + key + "' missing or not a string");
        }
        return it->get<std::string>();
    };
    CheckpointManifest m;
    m.checkpoint_id = str("checkpoint_id");
    m.base_model = str("base_model");
    m.dataset_digest = str("dataset_digest");
    auto count = j.find("example_count");
    if (count == j.end() || !count->is_number_unsigned() || count->get<std::uint64_t>() == 0) {
        throw TrainerFailure("manifest field 'example_count' must be a positive integer");
    }
    m.example_count = count->get<std::uint64_t>();
    if (auto meta = j.find("trainer_metadata"); meta != j.end()) {
        if (!meta->is_object()) throw TrainerFailure("manifest field 'trainer_metadata' must be an object");
        m.trainer_metadata = *meta;
    }
    if (!is_valid_checkpoint_id(m.checkpoint_id)) {
        throw TrainerFailure("manifest checkpoint_id '" + m.checkpoint_id + "' is not a valid id");
    }
    return m;
}

CheckpointStore::CheckpointStore(fs::path root) : root_(std::move(root)) {}

fs::path CheckpointStore::directory_for(const std::string& checkpoint_id) const {
    return root_ / checkpoint_id;
}

bool CheckpointStore::contains(const std::string& checkpoint_id) const {
    return load(checkpoint_id).has_value();
}

std::optional<CheckpointManifest> CheckpointStore::load(const std::string& checkpoint_id) const {
    if (!is_valid_checkpoint_id(checkpoint_id)) return std::nullopt;
    const auto path = directory_for(checkpoint_id) / "manifest.json";
    std::ifstream in(path);
    if (!in) return std::nullopt;
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    try {
        auto m = CheckpointManifest::from_json(j);
        if (m.checkpoint_id != checkpoint_id) return std::nullopt;
        return m;
    } catch (const TrainerFailure&) {
        return std::nullopt;
    }
}

void CheckpointStore::save(const CheckpointManifest& manifest) const {
    const auto dir = directory_for(manifest.checkpoint_id);
    fs::create_directories(dir);
    write_file_atomic(dir / "manifest.json", manifest.to_json().dump(2) + "\n");
}

}  // namespace iga
