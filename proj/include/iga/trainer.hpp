#pragma once

#include "iga/checkpoint.hpp"
#include "iga/curriculum.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace iga {

enum class TrainerMode { mock, subprocess };

/// Where and how SFT runs. Subprocess mode invokes
/// `<executable> --dataset <path> --base-model <id> --output <dir>` and
/// expects `<dir>/manifest.json` on exit 0.
struct TrainerHandle {
    TrainerMode mode = TrainerMode::mock;
    std::optional<std::filesystem::path> executable_path;
    std::filesystem::path work_dir;

    static TrainerHandle mock(std::filesystem::path work_dir);
    /// Throws ConfigError when the executable does not exist.
    static TrainerHandle subprocess(std::filesystem::path executable, std::filesystem::path work_dir);
};

/// One call to Trainer::train, successful or not.
struct TrainerInvocation {
    std::string base_model;
    std::filesystem::path dataset_path;
    std::optional<CheckpointManifest> manifest;
    std::string error;
};

/// Writes D as `{rule, query, response}` JSONL records, one per pair.
void write_training_dataset(const std::filesystem::path& path, const std::string& rule,
                            const std::vector<AlignedPair>& pairs);

class Trainer {
public:
    Trainer(TrainerHandle handle, std::shared_ptr<CheckpointStore> store);

    /// Errors: EmptyDataset (no records), TrainerFailure (bad dataset,
    /// nonzero exit, missing or inconsistent manifest).
    CheckpointManifest train(const std::string& base_model, const std::filesystem::path& dataset_path,
                             const std::string& rule);

    std::vector<TrainerInvocation> invocations() const;
    const TrainerHandle& handle() const noexcept { return handle_; }
    const std::shared_ptr<CheckpointStore>& store() const noexcept { return store_; }

    /// `ckpt-` + 16 hex digits of sha256(base_model "\n" dataset_digest).
    static std::string mock_checkpoint_id(const std::string& base_model, const std::string& dataset_digest);

private:
    CheckpointManifest train_subprocess(const std::string& base_model,
                                        const std::filesystem::path& dataset_path,
                                        const std::string& digest, std::uint64_t count);

    TrainerHandle handle_;
    std::shared_ptr<CheckpointStore> store_;
    mutable std::mutex mutex_;
    std::vector<TrainerInvocation> invocations_;
};

}  // namespace iga
