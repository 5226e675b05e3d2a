#include "iga/cli.hpp"

#include "iga/config.hpp"
#include "iga/error.hpp"
#include "iga/eval.hpp"
#include "iga/fsutil.hpp"
#include "iga/orchestrator.hpp"

#include <CLI11.hpp>

#include <optional>
#include <string>
#include <vector>

namespace iga {

namespace {

struct Args {
    std::string config;
    std::string work_dir;
    std::vector<std::string> set;
    bool dry_run = false;
    std::string backend;
    std::string fixtures;
    std::string checkpoint;
    std::string table;
    bool json = false;
};

void add_common(CLI::App* cmd, Args& a, bool config_required) {
    auto* c = cmd->add_option("--config", a.config, "Run configuration (JSON)");
    if (config_required) c->required();
    cmd->add_option("--work-dir", a.work_dir, "Override the configured work directory");
    cmd->add_option("--set", a.set, "Override a config value, e.g. --set sail.n2=4 (repeatable)")
        ->allow_extra_args(false);
    cmd->add_flag("--dry-run", a.dry_run, "Validate config and print the call-budget upper bound");
    cmd->add_option("--backend", a.backend, "Backend kind")->check(CLI::IsMember({"scripted", "http"}));
    cmd->add_option("--fixtures", a.fixtures, "Fixture file for the scripted backend");
    cmd->add_flag("--json", a.json, "Print machine-readable JSON to stdout");
}

RunConfig load(const Args& a) {
    ConfigOverrides o;
    o.set = a.set;
    if (!a.work_dir.empty()) o.work_dir = a.work_dir;
    if (!a.backend.empty()) o.backend = a.backend;
    if (!a.fixtures.empty()) o.fixtures = a.fixtures;
    return load_config(a.config, o);
}

int dispatch(const std::string& verb, const Args& a, std::ostream& out, std::ostream& err) {
    if (verb == "report" && !a.table.empty()) {
        auto j = nlohmann::json::parse(read_file(a.table), nullptr, false);
        if (j.is_discarded()) throw SchemaError(a.table, "table file is not valid JSON");
        const auto report = EvalReport::build(ComparisonTable::from_json(j));
        out << (a.json ? report.to_json().dump(2) + "\n" : report.render_text());
        return 0;
    }
    if (a.config.empty()) throw UsageError(verb + " needs --config");

    auto config = load(a);
    if (a.dry_run) {
        out << Orchestrator::plan_budget(config).dump(2) << "\n";
        return 0;
    }

    Orchestrator orch(std::move(config));
    if (verb == "annotate") {
        const auto r = orch.annotate_phase();
        const auto summary = r.summary(orch.config().scenario.train_queries.size());
        err << "annotated " << r.cases.size() << " of " << orch.config().scenario.train_queries.size()
            << " queries into " << (orch.config().work_dir / "state" / "annotated.jsonl").string() << "\n";
        if (a.json) out << summary.dump(2) << "\n";
        return 0;
    }
    if (verb == "eval") {
        std::optional<std::string> ckpt;
        if (!a.checkpoint.empty()) ckpt = a.checkpoint;
        const auto s = orch.evaluate(ckpt);
        out << s.to_json().dump(2) << "\n";
        return 0;
    }

    RunReport report;
    if (verb == "align") {
        report = orch.align();
    } else if (verb == "resume") {
        report = orch.resume();
    } else {
        report = orch.load_report();
    }
    out << (a.json ? report.json.dump(2) + "\n" : report.text);
    if (verb != "report") err << "report written to " << (orch.config().work_dir / "report.json").string() << "\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rule alignment through graph-guided annotation and staged self-training", "iga"};
    app.require_subcommand(1, 1);
    Args a;

    auto* annotate = app.add_subcommand("annotate", "Annotate training queries with the teacher");
    auto* align = app.add_subcommand("align", "Annotate (or reuse the annotation), self-train, evaluate");
    auto* eval = app.add_subcommand("eval", "Score the base student or a checkpoint on the test split");
    auto* report = app.add_subcommand("report", "Print the run report, or a comparison table");
    auto* resume = app.add_subcommand("resume", "Continue an interrupted run");
    add_common(annotate, a, true);
    add_common(align, a, true);
    add_common(eval, a, true);
    add_common(report, a, false);
    add_common(resume, a, true);
    eval->add_option("--checkpoint", a.checkpoint, "Checkpoint id to score instead of the base student");
    report->add_option("--table", a.table, "Raw adherence table (JSON) to render with improvements");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    const auto verb = app.get_subcommands().front()->get_name();
    try {
        return dispatch(verb, a, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace iga
