#include "iga/orchestrator.hpp"

#include "iga/error.hpp"
#include "iga/fsutil.hpp"
#include "iga/http_backend.hpp"
#include "iga/parallel.hpp"
#include "iga/scripted_backend.hpp"
#include "iga/seeds.hpp"
#include "iga/text.hpp"

#include <algorithm>
#include <set>

namespace iga {

namespace fs = std::filesystem;

std::string_view to_string(Phase p) {
    switch (p) {
        case Phase::annotating: return "annotating";
        case Phase::sailing: return "sailing";
        case Phase::done: return "done";
    }
    return "annotating";
}

Phase phase_from_string(std::string_view s) {
    if (s == "annotating") return Phase::annotating;
    if (s == "sailing") return Phase::sailing;
    if (s == "done") return Phase::done;
    throw StateError("unknown run phase '" + std::string(s) + "'");
}

nlohmann::json AnnotationResult::summary(std::size_t query_count) const {
    auto fails = nlohmann::json::array();
    for (const auto& f : failures) fails.push_back({{"query", f.query}, {"reason", f.reason}});
    return {{"queries", query_count},
            {"annotated", cases.size()},
            {"accepted_naively", accepted_naively},
            {"igp_iterations", igp_iterations},
            {"modality_downgrades", modality_downgrades},
            {"failures", std::move(fails)}};
}

std::string seed_case_id(std::size_t index, std::size_t total) {
    const auto digits = std::max<std::size_t>(4, std::to_string(total).size());
    auto n = std::to_string(index + 1);
    if (n.size() < digits) n.insert(0, digits - n.size(), '0');
    return "case-" + n;
}

AnnotationResult annotate(const IgpEngine& igp, const std::string& rule, const std::vector<std::string>& queries,
                          const ModelRole& teacher, const ModelRole& judge, std::uint32_t k, Modality modality,
                          std::size_t parallelism) {
    if (queries.empty()) throw ConfigError("annotation needs at least one query");
    std::vector<std::optional<IgpResult>> results(queries.size());
    std::vector<std::string> errors(queries.size());

    parallel_for(queries.size(), parallelism, [&](std::size_t i) {
        try {
            results[i] = igp.run_igp(rule, queries[i], teacher, judge, k, modality);
        } catch (const BudgetExceeded&) {
            throw;
        } catch (const ScriptMiss&) {
            throw;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    AnnotationResult out;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (!results[i]) {
            out.failures.push_back({queries[i], errors[i]});
            continue;
        }
        const auto& r = *results[i];
        AnnotatedCase c;
        c.case_id = seed_case_id(i, queries.size());
        c.seed_id = c.case_id;
        c.query = queries[i];
        c.reference_answer = r.answer;
        c.graph = r.graph.value_or(LogicalGraph{});
        out.cases.push_back(std::move(c));
        if (r.accepted_naively) ++out.accepted_naively;
        if (r.modality_downgraded) ++out.modality_downgrades;
        out.igp_iterations += r.iterations_used;
    }
    if (out.cases.empty()) {
        throw AnnotationEmpty("every one of the " + std::to_string(queries.size()) +
                              " queries failed annotation; first error: " + out.failures.front().reason);
    }
    return out;
}

// RunStateStore

RunStateStore::RunStateStore(fs::path work_dir) : work_dir_(std::move(work_dir)) {}

bool RunStateStore::exists() const { return fs::exists(state_dir() / "state.json"); }

nlohmann::json RunStateStore::load() const {
    const auto path = state_dir() / "state.json";
    if (!fs::exists(path)) throw StateError("no run state at " + path.string());
    auto j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw StateError("run state " + path.string() + " is corrupt");
    return j;
}

void RunStateStore::save(const nlohmann::json& state) const {
    write_file_atomic(state_dir() / "state.json", state.dump(2) + "\n");
}

void RunStateStore::save_annotated(const std::vector<AnnotatedCase>& cases) const {
    std::vector<nlohmann::json> rows;
    rows.reserve(cases.size());
    for (const auto& c : cases) rows.push_back(c.to_json());
    write_file_atomic(annotated_path(), to_jsonl(rows));
}

std::vector<AnnotatedCase> RunStateStore::load_annotated() const {
    std::vector<nlohmann::json> rows;
    try {
        rows = read_jsonl(annotated_path());
    } catch (const std::exception& e) {
        throw StateError("cannot read annotated cases: " + std::string(e.what()));
    }
    std::vector<AnnotatedCase> cases;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        try {
            cases.push_back(AnnotatedCase::from_json(rows[i]));
        } catch (const SchemaError& e) {
            throw SchemaError("annotated.jsonl line " + std::to_string(i + 1) + "." + e.field_path(), e.what());
        }
        if (!ids.insert(cases.back().case_id).second) {
            throw SchemaError("annotated.jsonl line " + std::to_string(i + 1), "duplicate case_id");
        }
    }
    if (cases.empty()) throw AnnotationEmpty("annotated.jsonl holds no cases");
    return cases;
}

void RunStateStore::save_curriculum(const std::string& name, const Curriculum& curriculum) const {
    const auto dir = state_dir() / "curriculum";
    std::vector<nlohmann::json> solved, unsolved;
    for (const auto& p : curriculum.solved) solved.push_back(p.to_json());
    for (const auto& c : curriculum.unsolved) unsolved.push_back(c.to_json());
    write_file_atomic(dir / (name + ".solved.jsonl"), to_jsonl(solved));
    write_file_atomic(dir / (name + ".unsolved.jsonl"), to_jsonl(unsolved));
}

Curriculum RunStateStore::load_curriculum(const std::string& name) const {
    const auto dir = state_dir() / "curriculum";
    Curriculum c;
    try {
        for (const auto& j : read_jsonl(dir / (name + ".solved.jsonl"))) c.solved.push_back(AlignedPair::from_json(j));
        for (const auto& j : read_jsonl(dir / (name + ".unsolved.jsonl"))) {
            c.unsolved.push_back(AnnotatedCase::from_json(j));
        }
    } catch (const std::exception& e) {
        throw StateError("cannot read curriculum snapshot '" + name + "': " + e.what());
    }
    return c;
}

// Orchestrator

namespace {

std::uint64_t count_lines(const fs::path& path) {
    if (!fs::exists(path)) return 0;
    const auto body = read_file(path);
    return static_cast<std::uint64_t>(std::count(body.begin(), body.end(), '\n'));
}

void truncate_lines(const fs::path& path, std::uint64_t keep) {
    if (!fs::exists(path)) {
        if (keep > 0) throw StateError("call log " + path.string() + " is missing");
        return;
    }
    const auto body = read_file(path);
    std::size_t pos = 0;
    for (std::uint64_t i = 0; i < keep; ++i) {
        const auto nl = body.find('\n', pos);
        if (nl == std::string::npos) throw StateError("call log " + path.string() + " is shorter than recorded");
        pos = nl + 1;
    }
    write_file_atomic(path, std::string_view(body).substr(0, pos));
}

std::shared_ptr<Backend> make_backend(const RunConfig& config) {
    if (config.backend.kind == "scripted") {
        return ScriptedBackend::from_file(*config.backend.fixtures, config.backend.vision);
    }
    HttpBackendConfig http;
    http.base_url = config.backend.base_url;
    http.vision = config.backend.vision;
    http.timeout_seconds = config.backend.timeout_seconds;
    http.models["teacher_vlm"] = config.roles.teacher;
    http.models["student"] = config.roles.student;
    http.models["judge"] = config.roles.judge.value_or(config.roles.teacher);
    for (std::size_t i = 0; i < config.roles.helpers.size(); ++i) {
        http.models["helper#" + std::to_string(i)] = config.roles.helpers[i];
    }
    http.apply_environment();
    return std::make_shared<HttpBackend>(std::move(http));
}

}  // namespace

Orchestrator::Orchestrator(RunConfig config, std::shared_ptr<Backend> backend, RunHooks hooks)
    : config_(std::move(config)),
      backend_override_(std::move(backend)),
      hooks_(std::move(hooks)),
      templates_(TemplateSet::resolve(config_.templates, config_.config_dir)),
      store_(config_.work_dir) {
    if (config_.renderer) renderer_ = make_dot_renderer(*config_.renderer);
}

Orchestrator::~Orchestrator() = default;

Gateway& Orchestrator::gateway() {
    if (!gateway_) throw StateError("gateway not started");
    return *gateway_;
}

Trainer& Orchestrator::trainer() {
    if (!trainer_) throw StateError("trainer not started");
    return *trainer_;
}

ModelRole Orchestrator::judge_role() const {
    return config_.roles.judge ? ModelRole::judge() : ModelRole::teacher();
}

std::vector<ModelRole> Orchestrator::helper_roles() const {
    std::vector<ModelRole> out;
    for (std::uint32_t i = 0; i < config_.roles.helpers.size(); ++i) out.push_back(ModelRole::helper(i));
    return out;
}

void Orchestrator::start(Start mode, const fs::path& call_log) {
    const auto& wd = config_.work_dir;
    std::uint64_t offset = 0;
    switch (mode) {
        case Start::fresh:
            for (const auto* sub : {"state", "checkpoints", "datasets", "training"}) fs::remove_all(wd / sub);
            for (const auto* file : {"report.json", "report.txt"}) fs::remove(wd / file);
            fs::remove(call_log);
            break;
        case Start::keep_log:
            offset = count_lines(call_log);
            break;
        case Start::resume:
            offset = state_.value("call_log_offset", std::uint64_t{0});
            truncate_lines(call_log, offset);
            break;
        case Start::isolated:
            fs::remove(call_log);
            break;
    }
    fs::create_directories(wd);

    checkpoints_ = std::make_shared<CheckpointStore>(wd / "checkpoints");
    GatewayOptions opts;
    opts.call_budget = config_.call_budget;
    opts.retry.max_attempts = config_.backend.retries;
    opts.parallelism = config_.parallelism;
    opts.call_log_path = call_log;
    gateway_ = std::make_unique<Gateway>(opts, checkpoints_);
    gateway_->restore_call_count(offset);

    auto backend = backend_override_ ? backend_override_ : make_backend(config_);
    for (auto kind : {RoleKind::teacher_vlm, RoleKind::student, RoleKind::helper, RoleKind::judge}) {
        gateway_->bind(kind, backend);
    }

    auto handle = config_.trainer_mode == "subprocess" ? TrainerHandle::subprocess(*config_.trainer_executable, wd)
                                                       : TrainerHandle::mock(wd);
    trainer_ = std::make_unique<Trainer>(std::move(handle), checkpoints_);

    if (config_.modality == "auto") {
        modality_ = renderer_ && gateway_->supports_vision(ModelRole::teacher()) ? Modality::image : Modality::text;
    } else {
        modality_ = *modality_from_string(config_.modality);
    }
}

void Orchestrator::persist(const std::string& boundary) {
    state_["call_log_offset"] = gateway_->calls_made();
    store_.save(state_);
    if (hooks_.after_snapshot) hooks_.after_snapshot(boundary);
}

AnnotationResult Orchestrator::run_annotation() {
    IgpOptions opts;
    opts.answer_temperature = config_.answer_temperature;
    opts.graph_temperature = config_.graph_temperature;
    opts.judge_temperature = config_.judge_temperature;
    opts.max_tokens = config_.max_tokens;
    opts.seed = config_.seed;
    IgpEngine igp(*gateway_, templates_, opts, renderer_);

    auto result = annotate(igp, config_.scenario.rule, config_.scenario.train_queries, ModelRole::teacher(),
                           judge_role(), config_.k, modality_, config_.parallelism);
    store_.save_annotated(result.cases);
    state_["annotation"] = result.summary(config_.scenario.train_queries.size());
    state_["modality"] = std::string(to_string(modality_));
    state_["phase"] = std::string(to_string(Phase::sailing));
    persist("annotated");
    return result;
}

AnnotationResult Orchestrator::annotate_phase() {
    start(Start::fresh, config_.work_dir / "calls.jsonl");
    state_ = {{"phase", std::string(to_string(Phase::annotating))},
              {"template_set", templates_.id()},
              {"config_digest", config_.digest()},
              {"annotation", nullptr},
              {"sail", nullptr},
              {"evaluation", nullptr}};
    persist("start");
    return run_annotation();
}

RunReport Orchestrator::align() {
    bool reuse = false;
    if (store_.exists()) {
        auto prior = store_.load();
        reuse = prior.value("phase", "") == "sailing" && prior["sail"].is_null() &&
                fs::exists(store_.annotated_path());
        if (reuse) state_ = std::move(prior);
    }
    if (reuse) {
        start(Start::keep_log, config_.work_dir / "calls.jsonl");
        // the annotation may have been hand-edited; SAIL settings may differ from the annotate call
        state_["config_digest"] = config_.digest();
        state_["template_set"] = templates_.id();
        persist("start");
    } else {
        start(Start::fresh, config_.work_dir / "calls.jsonl");
        state_ = {{"phase", std::string(to_string(Phase::annotating))},
                  {"template_set", templates_.id()},
                  {"config_digest", config_.digest()},
                  {"annotation", nullptr},
                  {"sail", nullptr},
                  {"evaluation", nullptr}};
        persist("start");
    }
    return continue_run();
}

RunReport Orchestrator::resume() {
    state_ = store_.load();
    if (state_.value("config_digest", "") != config_.digest()) {
        throw StateError("configuration changed since the run started; resume needs the same config");
    }
    if (state_.value("template_set", "") != templates_.id()) {
        throw StateError("template set changed since the run started");
    }
    start(Start::resume, config_.work_dir / "calls.jsonl");
    return continue_run();
}

RunReport Orchestrator::continue_run() {
    auto phase = phase_from_string(state_.value("phase", "annotating"));
    try {
        if (phase == Phase::annotating) {
            run_annotation();
            phase = Phase::sailing;
        }
        if (phase == Phase::sailing) {
            SailOptions opts;
            opts.iterations = config_.T;
            opts.n2 = config_.n2;
            opts.n3 = config_.n3;
            opts.stage1_temperature = config_.stage1_temperature;
            opts.stage23_temperature = config_.stage23_temperature;
            opts.judge_temperature = config_.judge_temperature;
            opts.max_tokens = config_.max_tokens;
            opts.seed = config_.seed;
            opts.base_model = config_.roles.student;
            opts.dataset_dir = config_.work_dir / "datasets";
            SailEngine sail(*gateway_, templates_, *trainer_, opts);

            const auto seeds = store_.load_annotated();
            std::optional<SailProgress> progress;
            if (state_["sail"].is_object()) {
                const auto name = state_["sail"].value("curriculum_snapshot", "");
                progress = SailProgress::from_json(state_["sail"], store_.load_curriculum(name));
            }
            auto outcome = sail.run_sail(ModelRole::student(), helper_roles(), seeds, config_.scenario.rule,
                                         judge_role(), std::move(progress), [&](const SailProgress& p) {
                                             const auto name = "iter-" + std::to_string(p.history.size()) +
                                                               "-step-" +
                                                               std::to_string(p.history.back().size() - 1);
                                             store_.save_curriculum(name, p.curriculum);
                                             state_["sail"] = p.to_json();
                                             state_["sail"]["curriculum_snapshot"] = name;
                                             persist("sail/" + name);
                                         });
            state_["evaluation"] = run_evaluation(outcome.final_checkpoint);
            state_["phase"] = std::string(to_string(Phase::done));
            persist("done");
        }
    } catch (const std::exception& e) {
        state_["last_error"] = {{"phase", state_.value("phase", "annotating")}, {"message", e.what()}};
        store_.save(state_);
        throw;
    }
    state_.erase("last_error");
    store_.save(state_);

    auto report = build_report();
    write_file_atomic(config_.work_dir / "report.json", report.json.dump(2) + "\n");
    write_file_atomic(config_.work_dir / "report.txt", report.text);
    return report;
}

std::map<std::string, std::string> Orchestrator::collect_responses(const ModelRole& role) {
    const auto& items = config_.scenario.test_items;
    std::vector<std::optional<std::string>> out(items.size());
    parallel_for(items.size(), config_.parallelism, [&](std::size_t i) {
        GenerationRequest req;
        req.role = role;
        req.system_rule = config_.scenario.rule;
        req.user_content = templates_.render("propose_direct", {{"query", items[i].query}});
        req.sampling.temperature = 0.0;
        req.sampling.max_tokens = config_.max_tokens;
        req.sampling.seed = derive_seed(config_.seed, "eval|" + role.key() + "|" + items[i].query);
        try {
            out[i] = gateway_->generate(req);
        } catch (const BudgetExceeded&) {
            throw;
        } catch (const ScriptMiss&) {
            throw;
        } catch (const std::exception&) {
            // unanswered items score as missing
        }
    });
    std::map<std::string, std::string> responses;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (out[i]) responses[items[i].query] = *out[i];
    }
    return responses;
}

ScoreResult Orchestrator::score_role(const ModelRole& role) {
    ScoreOptions opts;
    opts.judge_temperature = config_.judge_temperature;
    opts.max_tokens = config_.max_tokens;
    opts.seed = config_.seed;
    opts.parallelism = config_.parallelism;
    return score(collect_responses(role), config_.scenario, judge_role(), *gateway_, templates_, opts);
}

nlohmann::json Orchestrator::run_evaluation(const std::optional<std::string>& final_checkpoint) {
    if (config_.scenario.test_items.empty()) return nullptr;
    nlohmann::json out;
    const auto base = score_role(ModelRole::student());
    out["baseline"] = base.to_json();
    out["final"] = nullptr;
    out["relative_improvement"] = nullptr;
    if (final_checkpoint) {
        const auto final_score = score_role(gateway_->register_checkpoint(*final_checkpoint));
        out["final"] = final_score.to_json();
        out["final"]["checkpoint"] = *final_checkpoint;
        try {
            out["relative_improvement"] = relative_improvement(base.adherence, final_score.adherence);
        } catch (const DegenerateBaseline& e) {
            out["relative_improvement_error"] = e.what();
        }
    }
    return out;
}

ScoreResult Orchestrator::evaluate(const std::optional<std::string>& checkpoint) {
    if (config_.scenario.test_items.empty()) throw ConfigError("scenario has no test items to evaluate");
    start(Start::isolated, config_.work_dir / "eval-calls.jsonl");
    const auto role = checkpoint ? gateway_->register_checkpoint(*checkpoint) : ModelRole::student();
    return score_role(role);
}

RunReport Orchestrator::load_report() const {
    const auto path = config_.work_dir / "report.json";
    if (!fs::exists(path)) throw StateError("no report at " + path.string() + "; run align first");
    auto j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw StateError("report " + path.string() + " is corrupt");
    return {j, render_report_text(j)};
}

RunReport Orchestrator::build_report() const {
    nlohmann::json r;
    r["scenario"] = config_.scenario.name;
    r["rule"] = config_.scenario.rule;
    r["template_set"] = templates_.id();
    r["modality"] = state_.value("modality", "text");
    r["settings"] = {{"k", config_.k},
                     {"T", config_.T},
                     {"n2", config_.n2},
                     {"n3", config_.n3},
                     {"helpers", config_.roles.helpers.size()},
                     {"seed", config_.seed}};
    r["annotation"] = state_["annotation"];

    const auto& sail = state_["sail"];
    nlohmann::json s;
    auto iterations = nlohmann::json::array();
    std::uint64_t trainer_calls = 0;
    for (std::size_t t = 0; t < sail["history"].size(); ++t) {
        for (const auto& step : sail["history"][t]) {
            if (step.value("name", "") == "train") ++trainer_calls;
        }
        iterations.push_back({{"iteration", t + 1}, {"steps", sail["history"][t]}});
    }
    s["iterations"] = std::move(iterations);
    s["checkpoints"] = sail.value("checkpoints", nlohmann::json::array());
    s["final_checkpoint"] = sail.value("student_checkpoint", nlohmann::json());
    s["degenerate"] = s["checkpoints"].empty();
    s["trainer_calls"] = trainer_calls;

    const auto curriculum = store_.load_curriculum(sail.value("curriculum_snapshot", ""));
    const auto seeds = store_.load_annotated();
    std::set<std::string> solved_queries;
    for (const auto& p : curriculum.solved) solved_queries.insert(p.query);
    std::uint64_t seeds_solved = 0;
    for (const auto& c : seeds) seeds_solved += solved_queries.count(c.query);
    s["dataset_size"] = curriculum.solved.size();
    s["unsolved_remaining"] = curriculum.unsolved.size();
    s["seed_cases"] = seeds.size();
    s["seed_cases_solved"] = seeds_solved;
    s["solve_rate_pct"] = round_half_up(100.0 * static_cast<double>(seeds_solved) /
                                            static_cast<double>(std::max<std::size_t>(1, seeds.size())),
                                        1);
    r["sail"] = std::move(s);
    r["evaluation"] = state_["evaluation"];
    r["gateway_calls"] = state_.value("call_log_offset", std::uint64_t{0});
    return {r, render_report_text(r)};
}

nlohmann::json Orchestrator::plan_budget(const RunConfig& config) {
    const std::uint64_t n = config.scenario.train_queries.size();
    const std::uint64_t m = config.roles.helpers.size();
    const std::uint64_t k = config.k;
    const std::uint64_t annotate_calls = n * (5 + 2 * k);
    const std::uint64_t per_case =
        3 * (1 + config.n2 * (1 + m) + static_cast<std::uint64_t>(config.n2) * config.n3 * (1 + m));
    const std::uint64_t sail_calls = static_cast<std::uint64_t>(config.T) * n * per_case;
    const std::uint64_t eval_calls = 4 * config.scenario.test_items.size();
    const auto total = annotate_calls + sail_calls + eval_calls;
    return {{"annotate", annotate_calls},
            {"sail", sail_calls},
            {"eval", eval_calls},
            {"total", total},
            {"call_budget", config.call_budget},
            {"within_budget", total <= config.call_budget}};
}

std::string render_report_text(const nlohmann::json& r) {
    std::string out;
    out += "Scenario: " + r.value("scenario", "") + "\n";
    out += "Rule: " + r.value("rule", "") + "\n";
    const auto& st = r["settings"];
    out += "Settings: k=" + st["k"].dump() + " T=" + st["T"].dump() + " n2=" + st["n2"].dump() +
           " n3=" + st["n3"].dump() + " helpers=" + st["helpers"].dump() + " modality=" +
           r.value("modality", "text") + " templates=" + r.value("template_set", "") + "\n";

    const auto& a = r["annotation"];
    if (a.is_object()) {
        out += "\nAnnotation: " + a["annotated"].dump() + "/" + a["queries"].dump() + " queries annotated, " +
               a["accepted_naively"].dump() + " accepted naively, " + a["igp_iterations"].dump() +
               " graph refinements\n";
        for (const auto& f : a["failures"]) {
            out += "  failed: " + f.value("query", "") + " (" + f.value("reason", "") + ")\n";
        }
    }

    const auto& s = r["sail"];
    if (s.is_object()) {
        for (const auto& it : s["iterations"]) {
            out += "\nIteration " + it["iteration"].dump() + "\n";
            for (const auto& step : it["steps"]) {
                std::string line = "  " + step.value("name", "");
                line.resize(std::max<std::size_t>(line.size() + 1, 24), ' ');
                line += "unsolved " + step["unsolved_before"].dump() + " -> " + step["unsolved_after"].dump() +
                        "  D=" + step["dataset_size"].dump();
                if (step.value("name", "") == "train") {
                    line += "  " + step.value("training", "");
                    if (step.contains("manifest") && step["manifest"].is_object()) {
                        line += " " + step["manifest"].value("checkpoint_id", "");
                    }
                }
                out += line + "\n";
            }
        }
        out += "\nFinal checkpoint: " +
               (s["final_checkpoint"].is_string() ? s["final_checkpoint"].get<std::string>()
                                                  : std::string("none (no training run produced a checkpoint)")) +
               "\n";
        out += "Seed cases solved: " + s["seed_cases_solved"].dump() + "/" + s["seed_cases"].dump() + " (" +
               text::fixed(s["solve_rate_pct"].get<double>(), 1) + "%)\n";
        out += "Dataset size: " + s["dataset_size"].dump() + ", unsolved remaining: " +
               s["unsolved_remaining"].dump() + "\n";
    }

    const auto& e = r["evaluation"];
    if (e.is_object()) {
        const auto cell = [](const nlohmann::json& score) {
            return text::fixed(score["adherence"].get<double>(), 1) + "% (" + score["aligned"].dump() + "/" +
                   score["total"].dump() + ")";
        };
        out += "\nRule adherence, base student: " + cell(e["baseline"]) + "\n";
        if (e["final"].is_object()) out += "Rule adherence, final checkpoint: " + cell(e["final"]) + "\n";
        if (e["relative_improvement"].is_number()) {
            out += "Relative improvement: " + text::fixed(e["relative_improvement"].get<double>(), 2) + "%\n";
        }
    }
    out += "\nGateway calls: " + r["gateway_calls"].dump() + "\n";
    return out;
}

}  // namespace iga
