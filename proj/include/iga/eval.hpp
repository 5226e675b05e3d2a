#pragma once

#include "iga/gateway.hpp"
#include "iga/templates.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace iga {

struct TestItem {
    std::string query;
    std::string reference_answer;
};

/// One rule-based scenario: a rule, unannotated training queries, and test
/// queries with human reference answers.
struct Scenario {
    std::string name;
    std::string rule;
    std::vector<std::string> train_queries;
    std::vector<TestItem> test_items;

    /// Throws SchemaError with the offending field path.
    static Scenario from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

Scenario load_scenario(const std::filesystem::path& path);

/// Half away from zero at `decimals` places, tolerant of binary
/// representation error (e.g. 0.125 stored as 0.12499999...).
double round_half_up(double value, int decimals);

struct ScoreResult {
    double adherence = 0.0;  // percent, one decimal
    std::size_t aligned = 0;
    std::size_t total = 0;
    std::vector<std::string> missing;
    std::vector<std::string> judge_failures;

    nlohmann::json to_json() const;
};

struct ScoreOptions {
    std::size_t parallelism = 1;
    double judge_temperature = 0.0;
    int max_tokens = 512;
    std::int64_t seed = 0;
};

/// Adherence = 100 * aligned / test count. Missing responses and judge
/// failures count as not aligned.
ScoreResult score(const std::map<std::string, std::string>& responses, const Scenario& scenario,
                  const ModelRole& judge, Gateway& gateway, const TemplateSet& templates,
                  const ScoreOptions& options = {});

/// 100 * (method - baseline) / baseline at two decimals. Throws
/// DegenerateBaseline when baseline <= 0.
double relative_improvement(double baseline_pct, double method_pct);

/// Mean at two decimals. Throws EmptyList.
double aggregate(const std::vector<double>& improvements);

/// Adherence per method across scenarios, one column per method; the
/// baseline column anchors relative improvement.
struct ComparisonTable {
    std::string title;
    std::string baseline;
    std::vector<std::string> methods;  // column order, baseline included
    struct Row {
        std::string scenario;
        std::map<std::string, double> adherence;
    };
    std::vector<Row> rows;

    static ComparisonTable from_json(const nlohmann::json& j);
};

struct EvalReport {
    ComparisonTable table;
    std::vector<std::map<std::string, double>> improvements;  // per row, non-baseline methods
    std::map<std::string, double> averages;

    static EvalReport build(ComparisonTable table);
    /// Deterministic: sorted keys, values rendered with fixed decimals.
    nlohmann::json to_json() const;
    /// Plain-text table: adherence block, improvement block, average row.
    std::string render_text() const;
};

}  // namespace iga
