#pragma once

#include "iga/config.hpp"
#include "iga/curriculum.hpp"
#include "iga/eval.hpp"
#include "iga/gateway.hpp"
#include "iga/igp.hpp"
#include "iga/sail.hpp"
#include "iga/templates.hpp"
#include "iga/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace iga {

enum class Phase { annotating, sailing, done };

std::string_view to_string(Phase p);
Phase phase_from_string(std::string_view s);

struct AnnotationFailure {
    std::string query;
    std::string reason;
};

struct AnnotationResult {
    std::vector<AnnotatedCase> cases;  // input order
    std::vector<AnnotationFailure> failures;
    std::size_t accepted_naively = 0;
    std::uint64_t igp_iterations = 0;
    std::size_t modality_downgrades = 0;

    nlohmann::json summary(std::size_t query_count) const;
};

/// Runs IGP over every query with the teacher. Successes become cases
/// (reference = IGP answer; empty graph when accepted naively), failures are
/// reported. Throws AnnotationEmpty when nothing succeeds.
AnnotationResult annotate(const IgpEngine& igp, const std::string& rule, const std::vector<std::string>& queries,
                          const ModelRole& teacher, const ModelRole& judge, std::uint32_t k, Modality modality,
                          std::size_t parallelism = 1);

/// `case-0001`, `case-0002`, ... by input position.
std::string seed_case_id(std::size_t index, std::size_t total);

/// The on-disk run state under `<work_dir>/state/`.
class RunStateStore {
public:
    explicit RunStateStore(std::filesystem::path work_dir);

    std::filesystem::path state_dir() const { return work_dir_ / "state"; }
    std::filesystem::path annotated_path() const { return state_dir() / "annotated.jsonl"; }

    bool exists() const;
    nlohmann::json load() const;
    void save(const nlohmann::json& state) const;

    void save_annotated(const std::vector<AnnotatedCase>& cases) const;
    std::vector<AnnotatedCase> load_annotated() const;

    /// Writes `<name>.solved.jsonl` and `<name>.unsolved.jsonl` under curriculum/.
    void save_curriculum(const std::string& name, const Curriculum& curriculum) const;
    Curriculum load_curriculum(const std::string& name) const;

private:
    std::filesystem::path work_dir_;
};

/// Test hook: called after every persisted snapshot with its boundary name.
/// Throwing from it simulates a crash at that boundary.
struct RunHooks {
    std::function<void(const std::string& boundary)> after_snapshot;
};

struct RunReport {
    nlohmann::json json;
    std::string text;
};

/// Teacher annotation followed by SAIL on the student, with persisted,
/// resumable state. One rule (scenario) per run.
class Orchestrator {
public:
    /// `backend` replaces the configured backend for every role (tests).
    explicit Orchestrator(RunConfig config, std::shared_ptr<Backend> backend = nullptr, RunHooks hooks = {});
    ~Orchestrator();

    /// Fresh annotation pass; leaves the run in phase sailing.
    AnnotationResult annotate_phase();
    /// Reuses a prior annotation when present, then SAIL, evaluation, report.
    RunReport align();
    /// Continues from the last persisted snapshot.
    RunReport resume();
    /// Scores the base student, or a trained checkpoint, on the test split.
    ScoreResult evaluate(const std::optional<std::string>& checkpoint);
    /// Re-reads `<work_dir>/report.json`.
    RunReport load_report() const;

    /// Upper bound on gateway calls for the configured run; makes no calls.
    static nlohmann::json plan_budget(const RunConfig& config);

    const RunConfig& config() const noexcept { return config_; }
    Gateway& gateway();
    Trainer& trainer();
    Modality modality() const noexcept { return modality_; }

private:
    enum class Start { fresh, keep_log, resume, isolated };

    void start(Start mode, const std::filesystem::path& call_log);
    void persist(const std::string& boundary);
    AnnotationResult run_annotation();
    RunReport continue_run();
    nlohmann::json run_evaluation(const std::optional<std::string>& final_checkpoint);
    std::map<std::string, std::string> collect_responses(const ModelRole& role);
    ScoreResult score_role(const ModelRole& role);
    RunReport build_report() const;
    ModelRole judge_role() const;
    std::vector<ModelRole> helper_roles() const;

    RunConfig config_;
    std::shared_ptr<Backend> backend_override_;
    RunHooks hooks_;
    TemplateSet templates_;
    RunStateStore store_;
    std::shared_ptr<CheckpointStore> checkpoints_;
    std::unique_ptr<Gateway> gateway_;
    std::unique_ptr<Trainer> trainer_;
    Modality modality_ = Modality::text;
    GraphRenderer renderer_;
    nlohmann::json state_;
};

/// Human-readable rendering of a run report.
std::string render_report_text(const nlohmann::json& report);

}  // namespace iga
