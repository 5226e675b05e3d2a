#pragma once

#include "iga/checkpoint.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace iga {

enum class RoleKind { teacher_vlm, student, helper, judge };

std::string_view to_string(RoleKind kind);
std::optional<RoleKind> role_kind_from_string(std::string_view s);

/// Role-tagged handle on a generation backend. `index` only distinguishes
/// helpers; `checkpoint_id` only binds a student to a fine-tuned checkpoint.
class ModelRole {
public:
    static ModelRole teacher() { return ModelRole(RoleKind::teacher_vlm, 0, std::nullopt); }
    static ModelRole student() { return ModelRole(RoleKind::student, 0, std::nullopt); }
    static ModelRole judge() { return ModelRole(RoleKind::judge, 0, std::nullopt); }
    static ModelRole helper(std::uint32_t index) { return ModelRole(RoleKind::helper, index, std::nullopt); }

    RoleKind kind() const noexcept { return kind_; }
    std::uint32_t index() const noexcept { return index_; }
    const std::optional<std::string>& checkpoint_id() const noexcept { return checkpoint_id_; }

    /// "teacher_vlm", "student", "student@<ckpt>", "helper#<i>", "judge".
    std::string key() const;
    /// Inverse of key(); throws UnknownRole.
    static ModelRole parse(std::string_view key);

    friend bool operator==(const ModelRole&, const ModelRole&) = default;
    friend auto operator<=>(const ModelRole&, const ModelRole&) = default;

private:
    friend class Gateway;
    ModelRole(RoleKind kind, std::uint32_t index, std::optional<std::string> checkpoint)
        : kind_(kind), index_(index), checkpoint_id_(std::move(checkpoint)) {}

    RoleKind kind_;
    std::uint32_t index_;
    std::optional<std::string> checkpoint_id_;
};

struct ImageAttachment {
    std::string bytes;
    std::string media_type = "image/png";
};

struct Sampling {
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    int max_tokens = 1024;
};

struct GenerationRequest {
    ModelRole role = ModelRole::student();
    std::string system_rule;
    std::string user_content;
    std::optional<ImageAttachment> image;
    Sampling sampling;

    /// SHA-256 over a canonical encoding of every field; stable across runs.
    std::string digest() const;
};

struct CallRecord {
    std::string digest;
    std::string role;
    std::string timestamp;
    std::string response;
    double latency_ms = 0.0;
    int attempts = 1;
    std::string error;

    nlohmann::json to_json() const;
};

class Backend {
public:
    virtual ~Backend() = default;

    /// Throws TransientError for failures worth retrying.
    virtual std::string complete(const GenerationRequest& request) = 0;
    virtual bool supports_vision() const = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds base_delay{500};
    double multiplier = 2.0;
};

struct GatewayOptions {
    std::uint64_t call_budget = 10'000;
    RetryPolicy retry;
    std::size_t parallelism = 1;
    /// Appended to, one CallRecord per line, when set.
    std::optional<std::filesystem::path> call_log_path;
    /// Replaceable so tests do not sleep through backoff.
    std::function<void(std::chrono::milliseconds)> sleep;
};

/// Routes requests to the backend bound for each role kind. Safe for
/// concurrent generate() calls; call-log appends are serialized.
class Gateway {
public:
    Gateway(GatewayOptions options, std::shared_ptr<const CheckpointStore> checkpoints);

    void bind(RoleKind kind, std::shared_ptr<Backend> backend);

    /// Errors: UnknownRole, UnknownCheckpoint, CapabilityError,
    /// BudgetExceeded, BackendUnavailable (after retries), BackendError.
    std::string generate(const GenerationRequest& request);

    /// Returns a student role routed to `checkpoint_id`; the id must have a
    /// manifest in the checkpoint store.
    ModelRole register_checkpoint(const std::string& checkpoint_id);

    bool supports_vision(const ModelRole& role) const;

    std::vector<CallRecord> call_log() const;
    std::uint64_t calls_made() const;
    /// Resume support: account for calls made by an earlier process.
    void restore_call_count(std::uint64_t calls);

    std::size_t parallelism() const noexcept { return options_.parallelism; }
    std::uint64_t call_budget() const noexcept { return options_.call_budget; }

private:
    std::shared_ptr<Backend> resolve(const ModelRole& role) const;
    void append(CallRecord record);

    GatewayOptions options_;
    std::shared_ptr<const CheckpointStore> checkpoints_;
    std::map<RoleKind, std::shared_ptr<Backend>> backends_;

    mutable std::mutex mutex_;
    std::set<std::string> registered_;
    std::uint64_t calls_ = 0;
    bool exhausted_ = false;
    std::vector<CallRecord> log_;
    std::ofstream log_file_;
};

}  // namespace iga
