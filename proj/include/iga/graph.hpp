#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iga {

/// One (entity, relation, entity) edge of a logical graph, stored in
/// canonical form: trimmed, internal whitespace collapsed, no field empty.
class Triplet {
public:
    /// Returns nullopt when any field is empty after normalization.
    static std::optional<Triplet> make(std::string_view subject, std::string_view relation,
                                       std::string_view object);

    const std::string& subject() const noexcept { return subject_; }
    const std::string& relation() const noexcept { return relation_; }
    const std::string& object() const noexcept { return object_; }

    /// Case-insensitive three-way comparison over (subject, relation, object).
    friend int compare_ci(const Triplet& a, const Triplet& b);

    friend bool operator==(const Triplet&, const Triplet&) = default;

private:
    Triplet(std::string s, std::string r, std::string o)
        : subject_(std::move(s)), relation_(std::move(r)), object_(std::move(o)) {}

    std::string subject_;
    std::string relation_;
    std::string object_;
};

/// The reasoning graph G behind a rule-aligned answer. Immutable: triplets
/// are kept in canonical order (case-insensitive lexicographic) and
/// deduplicated case-insensitively, first-seen casing wins.
class LogicalGraph {
public:
    LogicalGraph() = default;
    explicit LogicalGraph(std::vector<Triplet> triplets, std::uint32_t revision = 0);

    const std::vector<Triplet>& triplets() const noexcept { return triplets_; }
    std::uint32_t revision() const noexcept { return revision_; }
    std::size_t size() const noexcept { return triplets_.size(); }
    bool empty() const noexcept { return triplets_.empty(); }

    LogicalGraph with_revision(std::uint32_t revision) const;

    /// Exact value equality (casing and revision included).
    friend bool operator==(const LogicalGraph&, const LogicalGraph&) = default;

private:
    std::vector<Triplet> triplets_;
    std::uint32_t revision_ = 0;
};

/// Builds a graph from the first parseable JSON array found in model text.
/// Elements may be ["s","r","o"] or {"subject","relation","object"};
/// malformed elements are skipped. Throws ParseError when there is no
/// array or it yields no triplet.
LogicalGraph parse_triplets(std::string_view raw_model_output);

/// Case-insensitive canonical-set equality; revision is ignored.
bool graphs_equal(const LogicalGraph& a, const LogicalGraph& b);

/// `<subject> --[<relation>]--> <object>` per line, canonical order.
std::string narrate(const LogicalGraph& g);

/// Deterministic DOT digraph; one node per case-insensitively distinct entity.
std::string to_dot(const LogicalGraph& g);

/// `{"triplets": [["s","r","o"], ...], "revision": n}`
nlohmann::json to_json(const LogicalGraph& g);
LogicalGraph graph_from_json(const nlohmann::json& j);

}  // namespace iga
