#include "iga/sail.hpp"

#include "iga/error.hpp"
#include "iga/judge.hpp"
#include "iga/parallel.hpp"
#include "iga/seeds.hpp"
#include "iga/text.hpp"

#include <map>
#include <set>

namespace iga {

namespace {

constexpr const char* kNoHint = "(none)";

struct StepPlan {
    std::string name;
    Stage stage = Stage::direct;
    bool train = false;
    bool dedup = false;
    std::uint32_t augment = 1;
    std::optional<std::size_t> helper;
};

// Per iteration with m helpers:
//   stage1/student, [x n2] stage2/student, stage2/helper#i..., [x n3] stage3/student,
//   stage3/helper#i..., train
StepPlan plan_step(std::uint32_t step, const std::vector<ModelRole>& helpers, const SailOptions& opt) {
    const auto m = static_cast<std::uint32_t>(helpers.size());
    StepPlan plan;
    if (step == 0) {
        plan = {"stage1/student", Stage::direct, false, true, 1, std::nullopt};
    } else if (step == 1) {
        plan = {"stage2/student", Stage::hinted, false, false, opt.n2, std::nullopt};
    } else if (step < 2 + m) {
        const auto h = step - 2;
        plan = {"stage2/" + helpers[h].key(), Stage::hinted, false, false, 1, h};
    } else if (step == 2 + m) {
        plan = {"stage3/student", Stage::guided, false, false, opt.n3, std::nullopt};
    } else if (step < 3 + 2 * m) {
        const auto h = step - 3 - m;
        plan = {"stage3/" + helpers[h].key(), Stage::guided, false, false, 1, h};
    } else {
        plan.name = "train";
        plan.train = true;
    }
    return plan;
}

std::uint64_t get_u64(const nlohmann::json& j, const char* key) { return j.value(key, std::uint64_t{0}); }

}  // namespace

nlohmann::json PacStats::to_json() const {
    nlohmann::json j = {{"attempted", attempted},
                        {"solved", solved},
                        {"pairs_added", pairs_added},
                        {"duplicate_pairs", duplicate_pairs},
                        {"proposal_calls", proposal_calls},
                        {"failed_proposals", failed_proposals},
                        {"unparseable_verdicts", unparseable_verdicts},
                        {"verbatim", verbatim},
                        {"errors", errors}};
    if (!error_messages.empty()) j["error_messages"] = error_messages;
    return j;
}

PacStats PacStats::from_json(const nlohmann::json& j) {
    PacStats s;
    s.attempted = get_u64(j, "attempted");
    s.solved = get_u64(j, "solved");
    s.pairs_added = get_u64(j, "pairs_added");
    s.duplicate_pairs = get_u64(j, "duplicate_pairs");
    s.proposal_calls = get_u64(j, "proposal_calls");
    s.failed_proposals = get_u64(j, "failed_proposals");
    s.unparseable_verdicts = get_u64(j, "unparseable_verdicts");
    s.verbatim = get_u64(j, "verbatim");
    s.errors = get_u64(j, "errors");
    s.error_messages = j.value("error_messages", std::vector<std::string>{});
    return s;
}

nlohmann::json SailStepRecord::to_json() const {
    nlohmann::json j = {{"name", name},
                        {"stage", stage},
                        {"proposer", proposer},
                        {"unsolved_before", unsolved_before},
                        {"unsolved_after", unsolved_after},
                        {"dataset_size", dataset_size}};
    if (stage != 0) j["pac"] = stats.to_json();
    if (!training.empty()) j["training"] = training;
    if (manifest) j["manifest"] = manifest->to_json();
    return j;
}

SailStepRecord SailStepRecord::from_json(const nlohmann::json& j) {
    SailStepRecord r;
    r.name = j.at("name").get<std::string>();
    r.stage = j.value("stage", 0);
    r.proposer = j.value("proposer", std::string());
    r.unsolved_before = get_u64(j, "unsolved_before");
    r.unsolved_after = get_u64(j, "unsolved_after");
    r.dataset_size = get_u64(j, "dataset_size");
    if (j.contains("pac")) r.stats = PacStats::from_json(j["pac"]);
    r.training = j.value("training", std::string());
    if (j.contains("manifest")) r.manifest = CheckpointManifest::from_json(j["manifest"]);
    return r;
}

nlohmann::json SailProgress::to_json() const {
    auto hist = nlohmann::json::array();
    for (const auto& iter : history) {
        auto steps = nlohmann::json::array();
        for (const auto& s : iter) steps.push_back(s.to_json());
        hist.push_back(std::move(steps));
    }
    return {{"iteration", iteration},
            {"next_step", next_step},
            {"student_checkpoint", student_checkpoint ? nlohmann::json(*student_checkpoint) : nlohmann::json()},
            {"checkpoints", checkpoints},
            {"history", std::move(hist)},
            {"finished", finished}};
}

SailProgress SailProgress::from_json(const nlohmann::json& j, Curriculum curriculum) {
    SailProgress p;
    p.iteration = j.at("iteration").get<std::uint32_t>();
    p.next_step = j.at("next_step").get<std::uint32_t>();
    p.curriculum = std::move(curriculum);
    if (j.contains("student_checkpoint") && j["student_checkpoint"].is_string()) {
        p.student_checkpoint = j["student_checkpoint"].get<std::string>();
    }
    p.checkpoints = j.value("checkpoints", std::vector<std::string>{});
    for (const auto& iter : j.at("history")) {
        std::vector<SailStepRecord> steps;
        for (const auto& s : iter) steps.push_back(SailStepRecord::from_json(s));
        p.history.push_back(std::move(steps));
    }
    p.finished = j.value("finished", false);
    return p;
}

SailEngine::SailEngine(Gateway& gateway, const TemplateSet& templates, Trainer& trainer, SailOptions options)
    : gateway_(gateway), templates_(templates), trainer_(trainer), options_(std::move(options)) {}

std::string SailEngine::propose(const ModelRole& model, const AnnotatedCase& c, Stage stage,
                                const std::string& rule, std::uint32_t iteration, PacStats* stats) const {
    const auto narration = c.graph.empty() ? std::string(kNoHint) : narrate(c.graph);
    std::string prompt;
    switch (stage) {
        case Stage::direct:
            prompt = templates_.render("propose_direct", {{"query", c.query}});
            break;
        case Stage::hinted:
            prompt = templates_.render("propose_hinted", {{"query", c.query}, {"graph_narration", narration}});
            break;
        case Stage::guided:
            prompt = templates_.render(
                "propose_guided",
                {{"query", c.query}, {"graph_narration", narration}, {"reference", c.reference_answer}});
            break;
    }
    GenerationRequest req;
    req.role = model;
    req.system_rule = rule;
    req.user_content = std::move(prompt);
    req.sampling.temperature = stage == Stage::direct ? options_.stage1_temperature : options_.stage23_temperature;
    req.sampling.max_tokens = options_.max_tokens;
    const auto context = "sail|" + std::to_string(iteration) + "|" + std::to_string(static_cast<int>(stage)) +
                         "|" + model.key() + "|" + c.case_id;
    for (int attempt = 0; attempt < 2; ++attempt) {
        req.sampling.seed = derive_seed(options_.seed, context + "|" + std::to_string(attempt));
        if (stats) ++stats->proposal_calls;
        auto out = gateway_.generate(req);
        if (!text::trim(out).empty()) return out;
    }
    return {};
}

bool SailEngine::check_alignment(const std::string& proposal, const std::string& reference,
                                 const std::string& rule, const std::string& query,
                                 const ModelRole& judge) const {
    Sampling sampling;
    sampling.temperature = options_.judge_temperature;
    sampling.max_tokens = options_.max_tokens;
    sampling.seed = derive_seed(options_.seed, "check|" + query);
    return judge_alignment(gateway_, templates_, judge, rule, query, reference, proposal, sampling) ==
           Verdict::aligned;
}

Curriculum SailEngine::pac_pass(const ModelRole& model, Curriculum curriculum, Stage stage,
                                const std::string& rule, const ModelRole& judge, std::uint32_t iteration,
                                PacStats* stats) const {
    PacStats local;
    PacStats& st = stats ? *stats : local;

    auto cases = std::move(curriculum.unsolved);
    sort_canonical(cases);

    struct Outcome {
        std::string proposal;
        Verdict verdict = Verdict::not_aligned;
        std::string error;
        PacStats calls;
    };
    std::vector<Outcome> outcomes(cases.size());
    parallel_for(cases.size(), gateway_.parallelism(), [&](std::size_t i) {
        auto& out = outcomes[i];
        const auto& c = cases[i];
        try {
            out.proposal = propose(model, c, stage, rule, iteration, &out.calls);
            if (out.proposal.empty()) return;
            Sampling sampling;
            sampling.temperature = options_.judge_temperature;
            sampling.max_tokens = options_.max_tokens;
            sampling.seed = derive_seed(options_.seed, "check|" + std::to_string(iteration) + "|" +
                                                           std::to_string(static_cast<int>(stage)) + "|" +
                                                           model.key() + "|" + c.case_id);
            out.verdict = judge_alignment(gateway_, templates_, judge, rule, c.query, c.reference_answer,
                                          out.proposal, sampling);
        } catch (const BudgetExceeded&) {
            throw;
        } catch (const ScriptMiss&) {
            throw;
        } catch (const std::exception& e) {
            out.error = c.case_id + ": " + e.what();
        }
    });

    std::set<std::pair<std::string, std::string>> known;
    for (const auto& p : curriculum.solved) known.emplace(p.query, p.proposal);

    std::vector<AnnotatedCase> remaining;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        auto& out = outcomes[i];
        auto& c = cases[i];
        ++st.attempted;
        st.proposal_calls += out.calls.proposal_calls;
        if (!out.error.empty()) {
            ++st.errors;
            st.error_messages.push_back(out.error);
        } else if (out.proposal.empty()) {
            ++st.failed_proposals;
        } else if (out.verdict == Verdict::unparseable) {
            ++st.unparseable_verdicts;
        } else if (out.verdict == Verdict::aligned) {
            ++st.solved;
            if (text::trim(out.proposal) == text::trim(c.reference_answer)) ++st.verbatim;
            if (known.emplace(c.query, out.proposal).second) {
                curriculum.solved.push_back(AlignedPair{c.query, out.proposal, stage, model, iteration});
                ++st.pairs_added;
            } else {
                ++st.duplicate_pairs;
            }
            continue;
        }
        remaining.push_back(std::move(c));
    }
    curriculum.unsolved = std::move(remaining);
    return curriculum;
}

std::vector<AnnotatedCase> SailEngine::augment(const std::vector<AnnotatedCase>& unsolved, std::uint32_t factor) {
    if (factor == 0) throw std::invalid_argument("augmentation factor must be at least 1");
    std::vector<AnnotatedCase> out;
    out.reserve(unsolved.size() * factor);
    std::set<std::string> taken;
    for (const auto& c : unsolved) taken.insert(c.case_id);
    for (const auto& c : unsolved) {
        out.push_back(c);
        // skip suffixes an earlier augmentation already handed out
        std::uint32_t suffix = 1;
        for (std::uint32_t j = 1; j < factor; ++j) {
            AnnotatedCase copy = c;
            do {
                copy.case_id = c.case_id + ":d" + std::to_string(suffix++);
            } while (!taken.insert(copy.case_id).second);
            copy.duplicate_of = c.case_id;
            out.push_back(std::move(copy));
        }
    }
    sort_canonical(out);
    return out;
}

std::vector<AnnotatedCase> SailEngine::dedup_by_seed(const std::vector<AnnotatedCase>& unsolved) {
    std::map<std::string, AnnotatedCase> by_seed;
    for (const auto& c : unsolved) {
        auto [it, inserted] = by_seed.try_emplace(c.seed_id, c);
        if (inserted) {
            it->second.case_id = c.seed_id;
            it->second.duplicate_of.reset();
        }
    }
    std::vector<AnnotatedCase> out;
    out.reserve(by_seed.size());
    for (auto& [_, c] : by_seed) out.push_back(std::move(c));
    sort_canonical(out);
    return out;
}

SailOutcome SailEngine::run_sail(const ModelRole& base_student, const std::vector<ModelRole>& helpers,
                                 const std::vector<AnnotatedCase>& seed_cases, const std::string& rule,
                                 const ModelRole& judge, std::optional<SailProgress> resume_from,
                                 const SnapshotFn& on_snapshot) {
    if (options_.iterations == 0 || options_.n2 == 0 || options_.n3 == 0) {
        throw std::invalid_argument("T, n2 and n3 must all be positive");
    }
    SailProgress p;
    if (resume_from) {
        p = std::move(*resume_from);
    } else {
        p.curriculum.unsolved = seed_cases;
        sort_canonical(p.curriculum.unsolved);
    }
    ModelRole student = p.student_checkpoint ? gateway_.register_checkpoint(*p.student_checkpoint) : base_student;

    while (!p.finished && p.iteration <= options_.iterations) {
        if (p.history.size() < p.iteration) p.history.resize(p.iteration);
        const auto plan = plan_step(p.next_step, helpers, options_);
        auto& cur = p.curriculum;
        SailStepRecord rec;
        rec.name = plan.name;
        rec.unsolved_before = cur.unsolved.size();

        if (plan.train) {
            const auto path = options_.dataset_dir / ("iter-" + std::to_string(p.iteration) + ".jsonl");
            write_training_dataset(path, rule, cur.solved);
            try {
                auto manifest = trainer_.train(options_.base_model, path, rule);
                student = gateway_.register_checkpoint(manifest.checkpoint_id);
                p.student_checkpoint = manifest.checkpoint_id;
                p.checkpoints.push_back(manifest.checkpoint_id);
                rec.manifest = std::move(manifest);
                rec.training = "trained";
            } catch (const EmptyDataset&) {
                rec.training = "refused: empty dataset";
            }
        } else {
            if (plan.dedup) cur.unsolved = dedup_by_seed(cur.unsolved);
            if (plan.augment > 1) cur.unsolved = augment(cur.unsolved, plan.augment);
            rec.unsolved_before = cur.unsolved.size();
            const ModelRole& proposer = plan.helper ? helpers[*plan.helper] : student;
            rec.stage = static_cast<int>(plan.stage);
            rec.proposer = proposer.key();
            cur = pac_pass(proposer, std::move(cur), plan.stage, rule, judge, p.iteration, &rec.stats);
        }
        rec.unsolved_after = cur.unsolved.size();
        rec.dataset_size = cur.solved.size();
        p.history[p.iteration - 1].push_back(std::move(rec));

        if (plan.train) {
            if (cur.unsolved.empty() || p.iteration == options_.iterations) {
                p.finished = true;
            } else {
                ++p.iteration;
            }
            p.next_step = 0;
        } else {
            ++p.next_step;
        }
        if (on_snapshot) on_snapshot(p);
    }

    SailOutcome outcome;
    outcome.final_checkpoint = p.student_checkpoint;
    outcome.curriculum = p.curriculum;
    outcome.history = p.history;
    for (const auto& iter : p.history) {
        for (const auto& s : iter) {
            if (s.name == "train") ++outcome.trainer_calls;
        }
    }
    outcome.degenerate = p.checkpoints.empty();
    return outcome;
}

}  // namespace iga
