// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "iga/eval.hpp"
#include "iga/fsutil.hpp"
#include "iga/igp.hpp"
#include "iga/orchestrator.hpp"
#include "iga/sail.hpp"

#include "../support.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace iga;
using namespace iga::test_support;

namespace {

/// Collects mismatches for one criterion.
struct Checker {
    std::ostringstream problems;
    int failures = 0;

    template <typename A, typename B>
    void eq(const A& actual, const B& expected, const std::string& what) {
        if (!(actual == expected)) {
            if (failures++ < 5) problems << what << "; ";
        }
    }
    void that(bool ok, const std::string& what) { eq(ok, true, what); }
    void near(double actual, double expected, const std::string& what) {
        that(std::fabs(actual - expected) <= 0.01 + 1e-9, what + " = " + text::fixed(actual, 2));
    }
};

int run_criterion(const std::string& name, double budget_s, const std::function<void(Checker&)>& body) {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.that(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.that(secs < budget_s, "took " + text::fixed(secs, 2) + " s, limit " + text::fixed(budget_s, 0) + " s");
    if (c.failures == 0) {
        std::cout << "PASS " << name << " (" << text::fixed(secs, 2) << " s)\n";
        return 0;
    }
    std::cout << "FAIL " << name << ": " << c.problems.str() << "\n";
    return 1;
}

EvalReport table(const std::string& name) {
    return EvalReport::build(
        ComparisonTable::from_json(nlohmann::json::parse(read_file(source_path("data/tables/" + name + ".json")))));
}

void table_arithmetic(Checker& c) {
    const auto p = table("prompting");
    const std::vector<std::vector<double>> p_cells = {
        {8.55, 27.63}, {-17.64, 87.21}, {-29.52, 81.18}, {-19.72, 125.52}, {16.51, 44.04}};
    const std::vector<std::string> p_methods = {"CoT", "IGP"};
    const auto l = table("learning");
    const std::vector<std::vector<double>> l_cells = {{11.23, -26.58, 15.89, 32.19},
                                                      {-80.53, -91.60, 25.57, 87.02},
                                                      {-76.32, -93.98, 39.47, 81.95},
                                                      {-70.56, -88.89, 90.00, 170.56},
                                                      {20.85, -21.50, 31.60, 59.28}};
    const std::vector<std::string> l_methods = {"CoT", "SFT", "STaR", "IGA"};
    for (const auto& [r, cells, methods] :
         {std::tie(p, p_cells, p_methods), std::tie(l, l_cells, l_methods)}) {
        c.eq(r.improvements.size(), cells.size(), r.table.title + " row count");
        for (std::size_t i = 0; i < cells.size() && i < r.improvements.size(); ++i) {
            for (std::size_t m = 0; m < methods.size(); ++m) {
                c.near(r.improvements[i].at(methods[m]), cells[i][m], r.table.rows[i].scenario + "/" + methods[m]);
            }
        }
    }
    c.near(p.averages.at("CoT"), -8.36, "prompting CoT average");
    c.near(p.averages.at("IGP"), 73.12, "prompting IGP average");
    c.near(l.averages.at("CoT"), -39.07, "learning CoT average");
    c.near(l.averages.at("SFT"), -64.51, "learning SFT average");
    c.near(l.averages.at("STaR"), 40.51, "learning STaR average");
    c.near(l.averages.at("IGA"), 86.20, "learning IGA average");
}

// SAIL fixtures -------------------------------------------------------------

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

nlohmann::json sail_fixture(nlohmann::json judge) {
    for (const auto& e : {entry("*", "Write your own response", "guided {{seed}}"),
                          entry("*", "Hint (reasoning", "hinted {{seed}}"),
                          entry("*", "Respond to the query.", "direct {{seed}}")}) {
        judge.push_back(e);
    }
    return judge;
}

struct SailRig {
    TempDir dir;
    std::shared_ptr<CheckpointStore> store = std::make_shared<CheckpointStore>(dir / "checkpoints");
    std::shared_ptr<ScriptedBackend> backend;
    std::unique_ptr<Gateway> gateway;
    TemplateSet templates = TemplateSet::builtin();
    Trainer trainer{TrainerHandle::mock(dir.path()), store};
    std::unique_ptr<SailEngine> engine;

    SailRig(const nlohmann::json& fixture, std::uint32_t t, std::uint32_t n2, std::uint32_t n3)
        : backend(scripted(fixture)), gateway(make_gateway(backend, store)) {
        SailOptions o;
        o.iterations = t;
        o.n2 = n2;
        o.n3 = n3;
        o.seed = 7;
        o.dataset_dir = dir / "datasets";
        engine = std::make_unique<SailEngine>(*gateway, templates, trainer, o);
    }

    SailOutcome run(std::size_t cases) {
        return engine->run_sail(ModelRole::student(), {}, seed_cases(cases), "Never recommend a brand.",
                                ModelRole::judge());
    }
};

void bookkeeping_oracle(Checker& c) {
    const auto golden = nlohmann::json::parse(read_file(source_path("tests/golden/always_reject_trace.json")));
    SailRig rig(sail_fixture({entry("judge", "", "REJECT")}), 1, 2, 3);
    const auto out = rig.run(4);
    std::vector<std::string> ids;
    for (const auto& x : out.curriculum.unsolved) ids.push_back(x.case_id);
    c.eq(ids.size(), std::size_t{24}, "24 unsolved entries");
    c.eq(ids, golden["final_unsolved"].get<std::vector<std::string>>(), "unsolved ids match golden trace");
    c.that(out.curriculum.solved.empty(), "D empty");
    c.eq(out.history.at(0).size(), golden["steps"].size(), "step count");
    for (std::size_t i = 0; i < golden["steps"].size() && i < out.history[0].size(); ++i) {
        const auto& s = out.history[0][i];
        const auto& g = golden["steps"][i];
        c.eq(s.name, g["name"].get<std::string>(), "step name " + s.name);
        c.eq(s.unsolved_before, g["unsolved_before"].get<std::uint64_t>(), s.name + " unsolved_before");
        c.eq(s.unsolved_after, g["unsolved_after"].get<std::uint64_t>(), s.name + " unsolved_after");
    }
    c.eq(rig.gateway->calls_made(), golden["gateway_calls"].get<std::uint64_t>(), "gateway calls");
    c.that(out.degenerate && !out.final_checkpoint, "degenerate, no checkpoint");
}

void stage_escalation(Checker& c) {
    const std::uint32_t n2 = 2, n3 = 3;
    SailRig rig(sail_fixture({entry("judge", "Proposed answer:\nguided", "ACCEPT"), entry("judge", "", "REJECT")}), 1,
                n2, n3);
    const auto out = rig.run(4);
    c.that(out.curriculum.unsolved.empty(), "every seed solved");
    std::set<std::string> solved_queries;
    for (const auto& p : out.curriculum.solved) {
        c.that(p.stage == Stage::guided, "pair recorded at stage 3");
        solved_queries.insert(p.query);
    }
    c.eq(solved_queries.size(), std::size_t{4}, "all 4 seeds appear in D");
    for (const auto& s : out.history.at(0)) {
        if (s.stage == 1 || s.stage == 2) c.eq(s.stats.solved, std::uint64_t{0}, s.name + " solved nothing");
    }
    // per-case proposal calls, counted from the request log
    std::map<std::string, std::uint64_t> per_case;
    for (const auto& r : rig.backend->requests()) {
        if (r.role.kind() != RoleKind::student) continue;
        const auto q = r.user_content.substr(7, r.user_content.find('\n') - 7);
        ++per_case[q];
    }
    c.eq(per_case.size(), std::size_t{4}, "proposal calls seen for all 4 seeds");
    for (const auto& [q, n] : per_case) c.eq(n, std::uint64_t{1 + n2 + n2 * n3}, q + " proposal calls");
}

// IGP fixtures --------------------------------------------------------------

std::uint64_t igp_calls(const std::string& refine, std::uint32_t k, std::uint32_t* iterations) {
    const std::string graph = R"([["query", "asks for", "a phone"], ["rule", "forbids", "brands"]])";
    auto backend = scripted(nlohmann::json::array({
        entry("*", "Check whether a response follows a rule.", "REJECT: names a brand"),
        entry("*", "as a logical graph", graph),
        entry("*", "Refine the graph", refine),
        entry("*", "Following the reasoning graph", "Compare cameras by sensor size."),
        entry("*", "", "Buy the BrandX One."),
    }));
    auto gw = make_gateway(backend);
    const auto templates = TemplateSet::builtin();
    IgpEngine igp(*gw, templates, IgpOptions{});
    const auto r = igp.run_igp("Never recommend a brand.", "Which phone?", ModelRole::teacher(), ModelRole::judge(),
                               k, Modality::text);
    *iterations = r.iterations_used;
    return gw->calls_made();
}

void igp_termination(Checker& c) {
    const std::uint32_t k = 2;
    std::uint32_t iters = 0;
    auto calls = igp_calls(R"([["query", "asks for", "a phone"], ["rule", "forbids", "brands"]])", k, &iters);
    c.eq(iters, 1u, "constant refine: 1 refinement");
    c.eq(calls, std::uint64_t{5}, "constant refine: 5 calls");
    calls = igp_calls(R"([["draft", "revision", "{{digest}}"]])", k, &iters);
    c.eq(iters, k, "ever-changing refine: stops at k");
    c.eq(calls, std::uint64_t{4 + k}, "ever-changing refine: 4 + k calls");
    c.that(calls <= 5 + 2 * k, "within per-query bound");
}

void reset_to_base(Checker& c) {
    // case 1 is solvable, case 2 never is, so all three iterations train
    SailRig rig(sail_fixture({regex_entry("judge", "Query: query 1\n[\\s\\S]*Proposed answer:\nguided", "ACCEPT"),
                              entry("judge", "", "REJECT")}),
                3, 2, 2);
    rig.run(2);
    const auto calls = rig.trainer.invocations();
    c.eq(calls.size(), std::size_t{3}, "three trainer invocations");
    for (const auto& inv : calls) {
        c.eq(inv.base_model, std::string("student-base"), "base_model is the base student");
        c.that(inv.base_model.rfind("ckpt-", 0) != 0, "base_model is not a checkpoint");
    }
}

RunConfig toy_config(const std::filesystem::path& work_dir) {
    ConfigOverrides o;
    o.work_dir = work_dir;
    return load_config(source_path("data/toy/config.json"), o);
}

struct Crash : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void determinism_and_resume(Checker& c) {
    TempDir a, b;
    std::vector<std::string> boundaries;
    Orchestrator(toy_config(a.path()), nullptr, RunHooks{[&](const std::string& s) { boundaries.push_back(s); }})
        .align();
    Orchestrator(toy_config(b.path())).align();
    const auto reference = read_file(a / "report.json");
    c.eq(read_file(b / "report.json"), reference, "two clean runs agree");
    c.eq(reference, read_file(source_path("tests/golden/toy_report.json")), "report matches golden file");
    c.that(boundaries.size() >= 3, "snapshot boundaries seen");
    for (const auto& target : boundaries) {
        TempDir work;
        try {
            Orchestrator(toy_config(work.path()), nullptr, RunHooks{[&](const std::string& s) {
                             if (s == target) throw Crash(s);
                         }})
                .align();
            c.that(false, "crash hook at " + target + " did not fire");
        } catch (const Crash&) {
        }
        Orchestrator(toy_config(work.path())).resume();
        c.eq(read_file(work / "report.json"), reference, "resume after " + target);
    }
}

void graph_properties(Checker& c) {
    constexpr int kGraphs = 1000;
    GraphGenerator gen(11);
    std::mt19937 rng(11);
    std::vector<LogicalGraph> pool;
    for (int i = 0; i < kGraphs; ++i) {
        const auto g = gen.graph();
        c.eq(LogicalGraph(g.triplets(), g.revision()), g, "canonicalization idempotent");
        const auto v1 = gen.variant(g);
        const auto v2 = gen.variant(v1);
        c.that(graphs_equal(g, g), "reflexive");
        c.that(graphs_equal(g, v1) && graphs_equal(v1, g), "symmetric on variants");
        c.that(graphs_equal(v1, v2) && graphs_equal(g, v2), "transitive on variants");
        auto shuffled = g.triplets();
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const LogicalGraph h(shuffled, g.revision());
        c.eq(narrate(h), narrate(g), "narration deterministic");
        c.eq(to_dot(h), to_dot(g), "DOT deterministic");
        c.eq(graph_from_json(nlohmann::json::parse(to_json(g).dump())), g, "JSON round trip");
        pool.push_back(g);
    }
    for (int i = 0; i < kGraphs; ++i) {
        const auto& x = pool[gen.pick(pool.size())];
        const auto& y = pool[gen.pick(pool.size())];
        const auto& z = pool[gen.pick(pool.size())];
        c.eq(graphs_equal(x, y), graphs_equal(y, x), "symmetric on random pairs");
        if (graphs_equal(x, y) && graphs_equal(y, z)) c.that(graphs_equal(x, z), "transitive on random triples");
    }
}

}  // namespace

int main() {
    int failed = 0;
    failed += run_criterion("table-arithmetic", 1, table_arithmetic);
    failed += run_criterion("sail-bookkeeping-oracle", 5, bookkeeping_oracle);
    failed += run_criterion("stage-escalation", 5, stage_escalation);
    failed += run_criterion("igp-termination", 5, igp_termination);
    failed += run_criterion("reset-to-base", 5, reset_to_base);
    failed += run_criterion("determinism-and-resume", 60, determinism_and_resume);
    failed += run_criterion("graph-properties", 30, graph_properties);
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
    return failed == 0 ? 0 : 1;
}
