#include "iga/eval.hpp"

#include "iga/error.hpp"
#include "iga/fsutil.hpp"
#include "iga/judge.hpp"
#include "iga/parallel.hpp"
#include "iga/seeds.hpp"
#include "iga/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace iga {

namespace {

std::string require_text(const nlohmann::json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path, "missing");
    if (!it->is_string()) throw SchemaError(path, "must be a string");
    if (text::trim(it->get_ref<const std::string&>()).empty()) throw SchemaError(path, "must not be empty");
    return it->get<std::string>();
}

const nlohmann::json& require_array(const nlohmann::json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(key, "missing");
    if (!it->is_array()) throw SchemaError(key, "must be an array");
    return *it;
}

}  // namespace

Scenario Scenario::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("", "scenario must be a JSON object");
    Scenario s;
    s.name = require_text(j, "name", "name");
    s.rule = require_text(j, "rule", "rule");

    std::set<std::string> seen;
    const auto& train = require_array(j, "train_queries");
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto path = "train_queries[" + std::to_string(i) + "]";
        if (!train[i].is_string() || text::trim(train[i].get<std::string>()).empty()) {
            throw SchemaError(path, "must be a non-empty string");
        }
        if (!seen.insert(train[i].get<std::string>()).second) throw SchemaError(path, "duplicate query");
        s.train_queries.push_back(train[i].get<std::string>());
    }

    seen.clear();
    const auto& test = require_array(j, "test_items");
    for (std::size_t i = 0; i < test.size(); ++i) {
        const auto path = "test_items[" + std::to_string(i) + "]";
        if (!test[i].is_object()) throw SchemaError(path, "must be an object");
        TestItem item{require_text(test[i], "query", path + ".query"),
                      require_text(test[i], "reference_answer", path + ".reference_answer")};
        if (!seen.insert(item.query).second) throw SchemaError(path + ".query", "duplicate query");
        s.test_items.push_back(std::move(item));
    }
    return s;
}

nlohmann::json Scenario::to_json() const {
    auto items = nlohmann::json::array();
    for (const auto& t : test_items) items.push_back({{"query", t.query}, {"reference_answer", t.reference_answer}});
    return {{"name", name}, {"rule", rule}, {"train_queries", train_queries}, {"test_items", std::move(items)}};
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::string body;
    try {
        body = read_file(path);
    } catch (const std::exception&) {
        throw SchemaError(path.string(), "scenario file not readable");
    }
    auto j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw SchemaError(path.string(), "scenario file is not valid JSON");
    return Scenario::from_json(j);
}

double round_half_up(double value, int decimals) {
    const long double scale = std::pow(10.0L, decimals);
    const long double scaled = std::fabs(static_cast<long double>(value)) * scale;
    const long double rounded = std::floor(scaled + 0.5L + 1e-9L) / scale;
    return static_cast<double>(value < 0 ? -rounded : rounded);
}

nlohmann::json ScoreResult::to_json() const {
    return {{"adherence", adherence},
            {"aligned", aligned},
            {"total", total},
            {"missing", missing},
            {"judge_failures", judge_failures}};
}

ScoreResult score(const std::map<std::string, std::string>& responses, const Scenario& scenario,
                  const ModelRole& judge, Gateway& gateway, const TemplateSet& templates,
                  const ScoreOptions& options) {
    ScoreResult result;
    result.total = scenario.test_items.size();
    enum class Outcome { aligned, rejected, missing, failed };
    std::vector<Outcome> outcomes(result.total, Outcome::rejected);

    parallel_for(result.total, options.parallelism, [&](std::size_t i) {
        const auto& item = scenario.test_items[i];
        auto it = responses.find(item.query);
        if (it == responses.end() || text::trim(it->second).empty()) {
            outcomes[i] = Outcome::missing;
            return;
        }
        Sampling sampling;
        sampling.temperature = options.judge_temperature;
        sampling.max_tokens = options.max_tokens;
        sampling.seed = derive_seed(options.seed, "score|" + item.query);
        try {
            const auto verdict = judge_alignment(gateway, templates, judge, scenario.rule, item.query,
                                                 item.reference_answer, it->second, sampling);
            outcomes[i] = verdict == Verdict::aligned       ? Outcome::aligned
                          : verdict == Verdict::unparseable ? Outcome::failed
                                                            : Outcome::rejected;
        } catch (const BudgetExceeded&) {
            throw;
        } catch (const ScriptMiss&) {
            throw;
        } catch (const std::exception&) {
            outcomes[i] = Outcome::failed;
        }
    });

    for (std::size_t i = 0; i < result.total; ++i) {
        const auto& q = scenario.test_items[i].query;
        switch (outcomes[i]) {
            case Outcome::aligned: ++result.aligned; break;
            case Outcome::missing: result.missing.push_back(q); break;
            case Outcome::failed: result.judge_failures.push_back(q); break;
            case Outcome::rejected: break;
        }
    }
    std::sort(result.missing.begin(), result.missing.end());
    std::sort(result.judge_failures.begin(), result.judge_failures.end());
    if (result.total > 0) {
        // tenths of a percent, rounded half-up in exact integer arithmetic
        const auto tenths = (2000 * result.aligned + result.total) / (2 * result.total);
        result.adherence = static_cast<double>(tenths) / 10.0;
    }
    return result;
}

double relative_improvement(double baseline_pct, double method_pct) {
    if (!(baseline_pct > 0.0)) {
        throw DegenerateBaseline("relative improvement needs a positive baseline, got " +
                                 text::fixed(baseline_pct, 1));
    }
    return round_half_up(100.0 * (method_pct - baseline_pct) / baseline_pct, 2);
}

double aggregate(const std::vector<double>& improvements) {
    if (improvements.empty()) throw EmptyList("cannot average an empty list of improvements");
    const double sum = std::accumulate(improvements.begin(), improvements.end(), 0.0);
    return round_half_up(sum / static_cast<double>(improvements.size()), 2);
}

ComparisonTable ComparisonTable::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("", "comparison table must be an object");
    ComparisonTable t;
    t.title = j.value("title", std::string());
    t.baseline = require_text(j, "baseline", "baseline");
    const auto& methods = require_array(j, "methods");
    for (std::size_t i = 0; i < methods.size(); ++i) {
        if (!methods[i].is_string()) throw SchemaError("methods[" + std::to_string(i) + "]", "must be a string");
        t.methods.push_back(methods[i].get<std::string>());
    }
    if (std::find(t.methods.begin(), t.methods.end(), t.baseline) == t.methods.end()) {
        throw SchemaError("baseline", "must be one of the methods");
    }
    const auto& rows = require_array(j, "rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto path = "rows[" + std::to_string(i) + "]";
        Row row;
        row.scenario = require_text(rows[i], "scenario", path + ".scenario");
        const auto adherence = rows[i].find("adherence");
        if (adherence == rows[i].end() || !adherence->is_object()) throw SchemaError(path + ".adherence", "missing");
        for (const auto& m : t.methods) {
            const auto v = adherence->find(m);
            if (v == adherence->end() || !v->is_number()) {
                throw SchemaError(path + ".adherence." + m, "missing or not a number");
            }
            const auto pct = v->get<double>();
            if (pct < 0.0 || pct > 100.0) throw SchemaError(path + ".adherence." + m, "outside [0, 100]");
            row.adherence[m] = pct;
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

EvalReport EvalReport::build(ComparisonTable table) {
    EvalReport r;
    std::map<std::string, std::vector<double>> columns;
    for (const auto& row : table.rows) {
        std::map<std::string, double> imp;
        const double base = row.adherence.at(table.baseline);
        for (const auto& m : table.methods) {
            if (m == table.baseline) continue;
            imp[m] = relative_improvement(base, row.adherence.at(m));
            columns[m].push_back(imp[m]);
        }
        r.improvements.push_back(std::move(imp));
    }
    for (const auto& [m, values] : columns) r.averages[m] = aggregate(values);
    r.table = std::move(table);
    return r;
}

nlohmann::json EvalReport::to_json() const {
    auto rows = nlohmann::json::array();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        nlohmann::json adherence = nlohmann::json::object();
        for (const auto& [m, v] : table.rows[i].adherence) adherence[m] = round_half_up(v, 1);
        nlohmann::json imp = nlohmann::json::object();
        for (const auto& [m, v] : improvements[i]) imp[m] = v;
        rows.push_back({{"scenario", table.rows[i].scenario},
                        {"adherence", std::move(adherence)},
                        {"relative_improvement", std::move(imp)}});
    }
    nlohmann::json averages_json = nlohmann::json::object();
    for (const auto& [m, v] : averages) averages_json[m] = v;
    return {{"title", table.title},
            {"baseline", table.baseline},
            {"methods", table.methods},
            {"rows", std::move(rows)},
            {"average_relative_improvement", std::move(averages_json)}};
}

std::string EvalReport::render_text() const {
    const std::string avg_label = "Average relative improvement";
    std::size_t label_width = avg_label.size();
    for (const auto& row : table.rows) label_width = std::max(label_width, row.scenario.size());
    std::size_t cell_width = 8;
    for (const auto& m : table.methods) cell_width = std::max(cell_width, m.size());

    auto pad_right = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    auto pad_left = [](const std::string& s, std::size_t w) {
        return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
    };
    auto line = [&](const std::string& label, const std::vector<std::string>& cells) {
        std::string out = pad_right(label, label_width);
        for (const auto& c : cells) out += "  " + pad_left(c, cell_width);
        // no trailing whitespace
        while (!out.empty() && out.back() == ' ') out.pop_back();
        return out + "\n";
    };
    const std::string rule(label_width + table.methods.size() * (cell_width + 2), '-');

    std::string out;
    if (!table.title.empty()) out += table.title + "\n";
    out += line("Scenario", table.methods);
    out += rule + "\n";
    for (const auto& row : table.rows) {
        std::vector<std::string> cells;
        for (const auto& m : table.methods) cells.push_back(text::fixed(row.adherence.at(m), 1) + "%");
        out += line(row.scenario, cells);
    }
    out += rule + "\n";
    out += "Relative improvement over " + table.baseline + " baseline (%)\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        std::vector<std::string> cells;
        for (const auto& m : table.methods) {
            cells.push_back(m == table.baseline ? "-" : text::fixed(improvements[i].at(m), 2) + "%");
        }
        out += line(table.rows[i].scenario, cells);
    }
    out += rule + "\n";
    std::vector<std::string> cells;
    for (const auto& m : table.methods) {
        cells.push_back(m == table.baseline || !averages.contains(m) ? "-" : text::fixed(averages.at(m), 2) + "%");
    }
    out += line(avg_label, cells);
    return out;
}

}  // namespace iga
