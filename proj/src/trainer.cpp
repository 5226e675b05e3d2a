#include "iga/trainer.hpp"

#include "iga/error.hpp"
#include "iga/fsutil.hpp"
#include "iga/process.hpp"
#include "iga/text.hpp"

#include <system_error>

namespace iga {

namespace fs = std::filesystem;

TrainerHandle TrainerHandle::mock(fs::path work_dir) {
    return TrainerHandle{TrainerMode::mock, std::nullopt, std::move(work_dir)};
}

TrainerHandle TrainerHandle::subprocess(fs::path executable, fs::path work_dir) {
    if (!fs::exists(executable)) {
        throw ConfigError("trainer executable not found: " + executable.string());
    }
    return TrainerHandle{TrainerMode::subprocess, std::move(executable), std::move(work_dir)};
}

void write_training_dataset(const fs::path& path, const std::string& rule,
                            const std::vector<AlignedPair>& pairs) {
    std::vector<nlohmann::json> rows;
    rows.reserve(pairs.size());
    for (const auto& p : pairs) rows.push_back({{"rule", rule}, {"query", p.query}, {"response", p.proposal}});
    write_file_atomic(path, to_jsonl(rows));
}

Trainer::Trainer(TrainerHandle handle, std::shared_ptr<CheckpointStore> store)
    : handle_(std::move(handle)), store_(std::move(store)) {}

std::string Trainer::mock_checkpoint_id(const std::string& base_model, const std::string& dataset_digest) {
    return "ckpt-" + text::sha256_hex(base_model + "\n" + dataset_digest).substr(0, 16);
}

CheckpointManifest Trainer::train(const std::string& base_model, const fs::path& dataset_path,
                                  const std::string& rule) {
    TrainerInvocation call{base_model, dataset_path, std::nullopt, {}};
    auto record = [&] {
        std::lock_guard lock(mutex_);
        invocations_.push_back(call);
    };
    try {
        std::string bytes;
        try {
            bytes = read_file(dataset_path);
        } catch (const std::exception& e) {
            throw TrainerFailure(std::string("dataset unreadable: ") + e.what());
        }
        // every line must be a {rule, query, response} record
        std::uint64_t count = 0;
        const auto lines = text::split_lines(bytes);
        for (std::size_t i = 0; i < lines.size(); ++i) {
            auto j = nlohmann::json::parse(lines[i], nullptr, false);
            const bool ok = j.is_object() && j.contains("rule") && j["rule"].is_string() &&
                            j.contains("query") && j["query"].is_string() && j.contains("response") &&
                            j["response"].is_string();
            if (!ok) {
                throw TrainerFailure(dataset_path.string() + ":" + std::to_string(i + 1) +
                                     ": not a {rule, query, response} record");
            }
            ++count;
        }
        if (count == 0) throw EmptyDataset("training dataset " + dataset_path.string() + " has no records");
        (void)rule;  // carried per record; the trainer formats the chat template

        const auto digest = text::sha256_hex(bytes);
        CheckpointManifest manifest;
        if (handle_.mode == TrainerMode::mock) {
            manifest.checkpoint_id = mock_checkpoint_id(base_model, digest);
            manifest.base_model = base_model;
            manifest.dataset_digest = digest;
            manifest.example_count = count;
            manifest.trainer_metadata = {{"mode", "mock"}};
        } else {
            manifest = train_subprocess(base_model, dataset_path, digest, count);
        }
        store_->save(manifest);
        call.manifest = manifest;
        record();
        return manifest;
    } catch (const std::exception& e) {
        call.error = e.what();
        record();
        throw;
    }
}

CheckpointManifest Trainer::train_subprocess(const std::string& base_model, const fs::path& dataset_path,
                                             const std::string& digest, std::uint64_t count) {
    const auto output = handle_.work_dir / "training" / ("run-" + digest.substr(0, 16));
    fs::remove_all(output);
    fs::create_directories(output);

    ProcessResult result;
    try {
        result = run_process({handle_.executable_path->string(), "--dataset", fs::absolute(dataset_path).string(),
                              "--base-model", base_model, "--output", fs::absolute(output).string()});
    } catch (const std::system_error& e) {
        throw TrainerFailure(std::string("cannot start trainer: ") + e.what());
    }
    if (result.exit_code != 0) {
        throw TrainerFailure("trainer exited with code " + std::to_string(result.exit_code) + ": " +
                             text::trim(result.err.substr(0, 500)));
    }
    const auto manifest_path = output / "manifest.json";
    if (!fs::exists(manifest_path)) throw TrainerFailure("trainer wrote no " + manifest_path.string());
    auto j = nlohmann::json::parse(read_file(manifest_path), nullptr, false);
    if (j.is_discarded()) throw TrainerFailure("trainer manifest is not valid JSON");
    auto manifest = CheckpointManifest::from_json(j);
    if (manifest.example_count != count) {
        throw TrainerFailure("manifest example_count " + std::to_string(manifest.example_count) +
                             " != dataset records " + std::to_string(count));
    }
    if (manifest.dataset_digest != digest) throw TrainerFailure("manifest dataset_digest does not match dataset");
    if (manifest.base_model != base_model) throw TrainerFailure("manifest base_model does not match request");
    manifest.trainer_metadata["artifact_dir"] = output.filename().string();
    return manifest;
}

std::vector<TrainerInvocation> Trainer::invocations() const {
    std::lock_guard lock(mutex_);
    return invocations_;
}

}  // namespace iga
