#include "iga/error.hpp"
#include "iga/fsutil.hpp"
#include "iga/orchestrator.hpp"
#include "iga/sail.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace iga;
using namespace iga::test_support;

namespace {

const std::string kRule = "Never recommend a brand.";

std::vector<AnnotatedCase> seed_cases(std::size_t n) {
    std::vector<AnnotatedCase> out;
    for (std::size_t i = 0; i < n; ++i) {
        AnnotatedCase c;
        c.case_id = seed_case_id(i, n);
        c.seed_id = c.case_id;
        c.query = "query " + std::to_string(i + 1);
        c.reference_answer = "reference " + std::to_string(i + 1);
        c.graph = LogicalGraph({*Triplet::make("rule", "forbids", "brands")});
        out.push_back(std::move(c));
    }
    return out;
}

nlohmann::json proposers() {
    return nlohmann::json::array({entry("*", "Write your own response", "guided {{seed}}"),
                                  entry("*", "Hint (reasoning", "hinted {{seed}}"),
                                  entry("*", "Respond to the query.", "direct {{seed}}")});
}

nlohmann::json with_judge(nlohmann::json judge_entries) {
    for (auto& e : proposers()) judge_entries.push_back(e);
    return judge_entries;
}

nlohmann::json always_reject() { return with_judge({entry("judge", "", "REJECT: off")}); }

nlohmann::json guided_only() {
    return with_judge({entry("judge", "Proposed answer:\nguided", "ACCEPT"), entry("judge", "", "REJECT")});
}

/// Case 1 is solved only with the reference in hand; case 2 never is.
nlohmann::json partly_solvable() {
    return with_judge({regex_entry("judge", "Query: query 1\n[\\s\\S]*Proposed answer:\nguided", "ACCEPT"),
                       entry("judge", "", "REJECT")});
}

struct Harness {
    Harness(const nlohmann::json& fixture, SailOptions opts, std::size_t parallelism = 1,
            std::optional<std::filesystem::path> root = std::nullopt)
        : root_dir(root ? *root : dir.path()),
          store(std::make_shared<CheckpointStore>(root_dir / "checkpoints")),
          backend(scripted(fixture)),
          gateway(make_gateway(backend, store, 10'000, parallelism)),
          templates(TemplateSet::builtin()),
          trainer(TrainerHandle::mock(root_dir), store),
          engine(*gateway, templates, trainer, with_dir(std::move(opts))) {}

    SailOptions with_dir(SailOptions o) const {
        o.dataset_dir = root_dir / "datasets";
        return o;
    }

    SailOutcome run(const std::vector<AnnotatedCase>& cases, std::vector<ModelRole> helpers = {},
                    std::optional<SailProgress> from = std::nullopt, const SailEngine::SnapshotFn& snap = {}) {
        return engine.run_sail(ModelRole::student(), helpers, cases, kRule, ModelRole::judge(), std::move(from), snap);
    }

    TempDir dir;
    std::filesystem::path root_dir;
    std::shared_ptr<CheckpointStore> store;
    std::shared_ptr<ScriptedBackend> backend;
    std::unique_ptr<Gateway> gateway;
    TemplateSet templates;
    Trainer trainer;
    SailEngine engine;
};

SailOptions opts(std::uint32_t t, std::uint32_t n2, std::uint32_t n3) {
    SailOptions o;
    o.iterations = t;
    o.n2 = n2;
    o.n3 = n3;
    o.seed = 7;
    return o;
}

std::vector<std::string> ids(const std::vector<AnnotatedCase>& cases) {
    std::vector<std::string> out;
    for (const auto& c : cases) out.push_back(c.case_id);
    return out;
}

/// Refuses any prompt that mentions "query 2"; everything else goes to `inner`.
class PickyBackend : public Backend {
public:
    explicit PickyBackend(std::shared_ptr<Backend> inner) : inner_(std::move(inner)) {}
    std::string complete(const GenerationRequest& r) override {
        if (r.user_content.find("query 2") != std::string::npos) throw BackendError("HTTP 400: refused");
        return inner_->complete(r);
    }
    bool supports_vision() const override { return false; }

private:
    std::shared_ptr<Backend> inner_;
};

}  // namespace

TEST(Augment, FactorOneIsIdentity) {
    const auto cases = seed_cases(3);
    EXPECT_EQ(SailEngine::augment(cases, 1), cases);
    EXPECT_THROW(SailEngine::augment(cases, 0), std::invalid_argument);
}

TEST(Augment, CopiesLinkBackToOriginalAndSeed) {
    const auto out = SailEngine::augment(seed_cases(2), 3);
    EXPECT_EQ(ids(out), (std::vector<std::string>{"case-0001", "case-0001:d1", "case-0001:d2", "case-0002",
                                                  "case-0002:d1", "case-0002:d2"}));
    for (const auto& c : out) {
        EXPECT_EQ(c.seed_id, c.case_id.substr(0, 9));
        EXPECT_EQ(c.is_seed(), c.case_id == c.seed_id);
        if (!c.is_seed()) EXPECT_EQ(*c.duplicate_of, c.seed_id);
    }
}

TEST(Augment, RepeatedAugmentationKeepsIdsUnique) {
    auto cases = seed_cases(3);
    for (std::uint32_t factor : {2u, 3u, 2u}) {
        cases = SailEngine::augment(cases, factor);
        const auto v = ids(cases);
        EXPECT_EQ(std::set<std::string>(v.begin(), v.end()).size(), v.size());
    }
    EXPECT_EQ(cases.size(), 3u * 2 * 3 * 2);
}

TEST(Augment, DedupCollapsesToSeeds) {
    auto cases = SailEngine::augment(SailEngine::augment(seed_cases(3), 2), 3);
    cases.erase(cases.begin());  // the original seed row need not survive
    const auto back = SailEngine::dedup_by_seed(cases);
    ASSERT_EQ(back.size(), 3u);
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].case_id, seed_case_id(i, 3));
        EXPECT_TRUE(back[i].is_seed());
    }
}

TEST(PacPass, DropsDuplicatePairsAndCountsVerbatim) {
    Harness h(nlohmann::json::array({entry("judge", "", "ACCEPT"), entry("*", "", "reference 1")}), opts(1, 1, 1));
    auto cases = seed_cases(2);
    cases[1].query = cases[0].query;
    Curriculum c;
    c.unsolved = cases;
    PacStats st;
    const auto out = h.engine.pac_pass(ModelRole::student(), c, Stage::direct, kRule, ModelRole::judge(), 1, &st);
    EXPECT_TRUE(out.unsolved.empty());
    ASSERT_EQ(out.solved.size(), 1u);
    EXPECT_EQ(st.solved, 2u);
    EXPECT_EQ(st.pairs_added, 1u);
    EXPECT_EQ(st.duplicate_pairs, 1u);
    EXPECT_EQ(st.verbatim, 1u);  // only case 1 has that reference
}

TEST(PacPass, PerCaseErrorsAreRecordedNotThrown) {
    auto backend = std::make_shared<PickyBackend>(scripted(guided_only()));
    TempDir dir;
    auto store = std::make_shared<CheckpointStore>(dir / "checkpoints");
    auto gw = make_gateway(backend, store);
    const auto templates = TemplateSet::builtin();
    Trainer trainer(TrainerHandle::mock(dir.path()), store);
    SailEngine engine(*gw, templates, trainer, opts(1, 1, 1));
    Curriculum c;
    c.unsolved = seed_cases(3);
    PacStats st;
    const auto out = engine.pac_pass(ModelRole::student(), c, Stage::guided, kRule, ModelRole::judge(), 1, &st);
    EXPECT_EQ(st.errors, 1u);
    ASSERT_EQ(st.error_messages.size(), 1u);
    EXPECT_EQ(st.error_messages[0].rfind("case-0002: ", 0), 0u);
    EXPECT_EQ(ids(out.unsolved), (std::vector<std::string>{"case-0002"}));
    EXPECT_EQ(out.solved.size(), 2u);
}

TEST(PacPass, ScriptMissPropagates) {
    Harness h(nlohmann::json::array({entry("judge", "", "ACCEPT")}), opts(1, 1, 1));
    Curriculum c;
    c.unsolved = seed_cases(1);
    EXPECT_THROW(h.engine.pac_pass(ModelRole::student(), c, Stage::direct, kRule, ModelRole::judge()), ScriptMiss);
}

TEST(PacPass, EmptyProposalIsRetriedOnceThenCounted) {
    Harness h(nlohmann::json::array({entry("judge", "", "ACCEPT"), entry("*", "", "  \n")}), opts(1, 1, 1));
    Curriculum c;
    c.unsolved = seed_cases(2);
    PacStats st;
    const auto out = h.engine.pac_pass(ModelRole::student(), c, Stage::direct, kRule, ModelRole::judge(), 1, &st);
    EXPECT_EQ(st.failed_proposals, 2u);
    EXPECT_EQ(st.proposal_calls, 4u);
    EXPECT_EQ(h.gateway->calls_made(), 4u);  // no judge calls
    EXPECT_EQ(out.unsolved.size(), 2u);
}

TEST(PacPass, UnparseableVerdictLeavesCaseUnsolved) {
    Harness h(with_judge({entry("judge", "", "Hard to say.")}), opts(1, 1, 1));
    Curriculum c;
    c.unsolved = seed_cases(1);
    PacStats st;
    const auto out = h.engine.pac_pass(ModelRole::student(), c, Stage::direct, kRule, ModelRole::judge(), 1, &st);
    EXPECT_EQ(st.unparseable_verdicts, 1u);
    EXPECT_EQ(out.unsolved.size(), 1u);
}

TEST(PacPass, ParallelMatchesSerial) {
    auto cases = SailEngine::augment(seed_cases(6), 4);
    Curriculum c;
    c.unsolved = cases;
    std::vector<Curriculum> results;
    std::vector<std::multiset<std::string>> digests;
    for (std::size_t par : {1u, 8u}) {
        Harness h(partly_solvable(), opts(1, 1, 1), par);
        PacStats st;
        results.push_back(h.engine.pac_pass(ModelRole::student(), c, Stage::guided, kRule, ModelRole::judge(), 1, &st));
        std::multiset<std::string> d;
        for (const auto& r : h.backend->requests()) d.insert(r.digest());
        digests.push_back(std::move(d));
    }
    EXPECT_EQ(results[0], results[1]);
    EXPECT_EQ(digests[0], digests[1]);
}

TEST(Sail, AlwaysRejectMatchesGoldenTrace) {
    const auto golden = nlohmann::json::parse(read_file(source_path("tests/golden/always_reject_trace.json")));
    Harness h(always_reject(), opts(1, 2, 3));
    const auto out = h.run(seed_cases(4));

    ASSERT_EQ(out.history.size(), 1u);
    const auto& steps = out.history[0];
    ASSERT_EQ(steps.size(), golden["steps"].size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const auto& g = golden["steps"][i];
        EXPECT_EQ(steps[i].name, g["name"]);
        EXPECT_EQ(steps[i].stage, g["stage"]);
        EXPECT_EQ(steps[i].unsolved_before, g["unsolved_before"]) << steps[i].name;
        EXPECT_EQ(steps[i].unsolved_after, g["unsolved_after"]) << steps[i].name;
        EXPECT_EQ(steps[i].dataset_size, g["dataset_size"]);
        if (g.contains("proposal_calls")) EXPECT_EQ(steps[i].stats.proposal_calls, g["proposal_calls"]);
        if (g.contains("training")) EXPECT_EQ(steps[i].training, g["training"]);
    }
    EXPECT_EQ(h.gateway->calls_made(), golden["gateway_calls"]);
    EXPECT_EQ(h.trainer.invocations().size(), golden["trainer_invocations"]);
    EXPECT_FALSE(out.final_checkpoint);
    EXPECT_TRUE(out.degenerate);
    EXPECT_TRUE(out.curriculum.solved.empty());
    EXPECT_EQ(ids(out.curriculum.unsolved), golden["final_unsolved"].get<std::vector<std::string>>());
}

TEST(Sail, StageThreeOnlyJudgeSolvesEverythingAtStageThree) {
    Harness h(guided_only(), opts(1, 2, 3));
    const auto out = h.run(seed_cases(4));
    const auto& steps = out.history[0];
    std::uint64_t proposals = 0;
    for (const auto& s : steps) proposals += s.stats.proposal_calls;
    EXPECT_EQ(proposals, 4u * (1 + 2 + 2 * 3));
    EXPECT_EQ(out.curriculum.solved.size(), 4u * 2 * 3);
    for (const auto& p : out.curriculum.solved) EXPECT_EQ(p.stage, Stage::guided);
    EXPECT_TRUE(out.curriculum.unsolved.empty());
    ASSERT_TRUE(out.final_checkpoint);
    EXPECT_EQ(h.store->load(*out.final_checkpoint)->example_count, 24u);
}

TEST(Sail, EveryIterationTrainsFromTheBaseStudent) {
    // a tuned student solves case 2 directly; case 3 never gets solved so all T iterations run
    auto fixture = nlohmann::json::array(
        {regex_entry("judge", "Query: query 1\n[\\s\\S]*Proposed answer:\nguided", "ACCEPT"),
         regex_entry("judge", "Query: query 2\n[\\s\\S]*Proposed answer:\ntuned", "ACCEPT"),
         entry("judge", "", "REJECT"), entry("student@*", "Query: query 2\nRespond", "tuned {{seed}}")});
    for (auto& e : proposers()) fixture.push_back(e);
    Harness h(fixture, opts(3, 2, 2));
    const auto out = h.run(seed_cases(3));
    const auto calls = h.trainer.invocations();
    ASSERT_EQ(calls.size(), 3u);
    for (const auto& c : calls) {
        EXPECT_EQ(c.base_model, "student-base");
        ASSERT_TRUE(c.manifest);
    }
    EXPECT_EQ(out.trainer_calls, 3u);
    EXPECT_EQ(*out.final_checkpoint, calls.back().manifest->checkpoint_id);
    EXPECT_LT(calls[0].manifest->example_count, calls[1].manifest->example_count);

    EXPECT_EQ(out.history[0][0].proposer, "student");
    EXPECT_EQ(out.history[1][0].proposer, "student@" + calls[0].manifest->checkpoint_id);
    EXPECT_EQ(out.history[2][0].proposer, "student@" + calls[1].manifest->checkpoint_id);
    EXPECT_EQ(ids(out.curriculum.unsolved).front().substr(0, 9), "case-0003");
}

TEST(Sail, StopsEarlyWhenNothingIsLeft) {
    Harness h(with_judge({entry("judge", "", "ACCEPT")}), opts(3, 2, 2));
    const auto out = h.run(seed_cases(3));
    ASSERT_EQ(out.history.size(), 1u);
    EXPECT_EQ(out.trainer_calls, 1u);
    EXPECT_TRUE(out.curriculum.unsolved.empty());
    EXPECT_FALSE(out.degenerate);
}

TEST(Sail, HelperStepsFollowStudentInEachStage) {
    Harness h(always_reject(), opts(1, 1, 1));
    const auto out = h.run(seed_cases(1), {ModelRole::helper(0), ModelRole::helper(1)});
    std::vector<std::string> names;
    for (const auto& s : out.history[0]) names.push_back(s.name);
    EXPECT_EQ(names, (std::vector<std::string>{"stage1/student", "stage2/student", "stage2/helper#0",
                                               "stage2/helper#1", "stage3/student", "stage3/helper#0",
                                               "stage3/helper#1", "train"}));
}

TEST(Sail, ResumeFromAnySnapshotReproducesTheRun) {
    TempDir shared;
    std::vector<SailProgress> snaps;
    SailOutcome full;
    {
        Harness h(partly_solvable(), opts(2, 2, 2), 1, shared.path());
        full = h.run(seed_cases(3), {ModelRole::helper(0)}, std::nullopt,
                     [&](const SailProgress& p) { snaps.push_back(p); });
    }
    ASSERT_EQ(snaps.size(), 2u * 6);
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        // state round-trips through JSON the same way the orchestrator stores it
        auto restored = SailProgress::from_json(nlohmann::json::parse(snaps[i].to_json().dump()), snaps[i].curriculum);
        Harness h(partly_solvable(), opts(2, 2, 2), 1, shared.path());
        const auto again = h.run(seed_cases(3), {ModelRole::helper(0)}, restored);
        EXPECT_EQ(again.curriculum, full.curriculum) << "snapshot " << i;
        EXPECT_EQ(again.final_checkpoint, full.final_checkpoint) << "snapshot " << i;
        ASSERT_EQ(again.history.size(), full.history.size());
        for (std::size_t t = 0; t < full.history.size(); ++t) {
            ASSERT_EQ(again.history[t].size(), full.history[t].size());
            for (std::size_t s = 0; s < full.history[t].size(); ++s) {
                EXPECT_EQ(again.history[t][s].to_json(), full.history[t][s].to_json()) << i << "/" << t << "/" << s;
            }
        }
    }
}

TEST(Sail, RejectsZeroParameters) {
    Harness h(always_reject(), opts(1, 0, 1));
    EXPECT_THROW(h.run(seed_cases(1)), std::invalid_argument);
}
