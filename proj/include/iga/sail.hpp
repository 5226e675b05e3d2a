#pragma once

#include "iga/curriculum.hpp"
#include "iga/gateway.hpp"
#include "iga/templates.hpp"
#include "iga/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace iga {

struct SailOptions {
    std::uint32_t iterations = 3;  // T
    std::uint32_t n2 = 3;
    std::uint32_t n3 = 5;
    double stage1_temperature = 0.3;
    double stage23_temperature = 0.8;
    double judge_temperature = 0.0;
    int max_tokens = 1024;
    std::int64_t seed = 0;
    /// Identifier of pi_0 handed to the trainer on every iteration.
    std::string base_model = "student-base";
    /// Training JSONL files go here as iter-<t>.jsonl.
    std::filesystem::path dataset_dir = "datasets";
};

/// Counters for one propose-and-check pass.
struct PacStats {
    std::uint64_t attempted = 0;
    std::uint64_t solved = 0;
    std::uint64_t pairs_added = 0;
    std::uint64_t duplicate_pairs = 0;
    std::uint64_t proposal_calls = 0;
    std::uint64_t failed_proposals = 0;
    std::uint64_t unparseable_verdicts = 0;
    std::uint64_t verbatim = 0;
    std::uint64_t errors = 0;
    std::vector<std::string> error_messages;

    nlohmann::json to_json() const;
    static PacStats from_json(const nlohmann::json& j);
};

/// One step of a SAIL iteration: a PAC pass (with any augmentation before
/// it) or the training step.
struct SailStepRecord {
    std::string name;  // "stage1/student", "stage2/helper#0", "train"
    int stage = 0;     // 0 for training
    std::string proposer;
    std::uint64_t unsolved_before = 0;  // after any dedup or augmentation
    std::uint64_t unsolved_after = 0;
    std::uint64_t dataset_size = 0;
    PacStats stats;
    std::optional<CheckpointManifest> manifest;
    std::string training;  // "trained" | "refused: empty dataset"

    nlohmann::json to_json() const;
    static SailStepRecord from_json(const nlohmann::json& j);
};

/// Everything needed to continue a SAIL run from a step boundary.
struct SailProgress {
    std::uint32_t iteration = 1;
    std::uint32_t next_step = 0;
    Curriculum curriculum;
    std::optional<std::string> student_checkpoint;
    std::vector<std::string> checkpoints;
    std::vector<std::vector<SailStepRecord>> history;  // per iteration
    bool finished = false;

    /// The curriculum is stored separately (JSONL snapshots).
    nlohmann::json to_json() const;
    static SailProgress from_json(const nlohmann::json& j, Curriculum curriculum);
};

struct SailOutcome {
    std::optional<std::string> final_checkpoint;
    Curriculum curriculum;
    std::vector<std::vector<SailStepRecord>> history;
    std::uint64_t trainer_calls = 0;
    /// No iteration produced a checkpoint (every training attempt refused).
    bool degenerate = false;
};

/// Staged propose-and-check curriculum with per-iteration SFT from the base
/// student. All passes are deterministic given scripted backends.
class SailEngine {
public:
    using SnapshotFn = std::function<void(const SailProgress&)>;

    SailEngine(Gateway& gateway, const TemplateSet& templates, Trainer& trainer, SailOptions options);

    std::string propose(const ModelRole& model, const AnnotatedCase& c, Stage stage, const std::string& rule,
                        std::uint32_t iteration = 1, PacStats* stats = nullptr) const;

    /// Unparseable verdicts count as not aligned.
    bool check_alignment(const std::string& proposal, const std::string& reference, const std::string& rule,
                         const std::string& query, const ModelRole& judge) const;

    Curriculum pac_pass(const ModelRole& model, Curriculum curriculum, Stage stage, const std::string& rule,
                        const ModelRole& judge, std::uint32_t iteration = 1, PacStats* stats = nullptr) const;

    /// `factor` copies of each case: the original plus factor-1 duplicates.
    static std::vector<AnnotatedCase> augment(const std::vector<AnnotatedCase>& unsolved, std::uint32_t factor);

    /// Collapses unsolved duplicates back to one seed case each.
    static std::vector<AnnotatedCase> dedup_by_seed(const std::vector<AnnotatedCase>& unsolved);

    /// Runs from `resume_from` when given, else from seed_cases. `on_snapshot`
    /// fires after each completed step.
    SailOutcome run_sail(const ModelRole& base_student, const std::vector<ModelRole>& helpers, const std::vector<AnnotatedCase>& seed_cases,
                         const std::string& rule, const ModelRole& judge,
                         std::optional<SailProgress> resume_from = std::nullopt,
                         const SnapshotFn& on_snapshot = {});

    const SailOptions& options() const noexcept { return options_; }

private:
    Gateway& gateway_;
    const TemplateSet& templates_;
    Trainer& trainer_;
    SailOptions options_;
};

}  // namespace iga
