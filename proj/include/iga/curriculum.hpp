#pragma once

#include "iga/gateway.hpp"
#include "iga/graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace iga {

/// Support level of a proposal: query only, + graph hint, + reference answer.
enum class Stage : int { direct = 1, hinted = 2, guided = 3 };

/// An unsolved curriculum item (x, y, G). Copies made by augmentation link
/// back to the case they were copied from and to the seed case they stem from.
struct AnnotatedCase {
    std::string case_id;
    std::string query;
    std::string reference_answer;
    LogicalGraph graph;
    std::optional<std::string> duplicate_of;
    std::string seed_id;

    bool is_seed() const noexcept { return !duplicate_of.has_value(); }

    nlohmann::json to_json() const;
    /// Throws SchemaError.
    static AnnotatedCase from_json(const nlohmann::json& j);

    friend bool operator==(const AnnotatedCase&, const AnnotatedCase&) = default;
};

/// An accepted (query, proposal) training example.
struct AlignedPair {
    std::string query;
    std::string proposal;
    Stage stage = Stage::direct;
    ModelRole proposer = ModelRole::student();
    std::uint32_t iteration = 1;

    nlohmann::json to_json() const;
    static AlignedPair from_json(const nlohmann::json& j);

    friend bool operator==(const AlignedPair&, const AlignedPair&) = default;
};

struct Curriculum {
    std::vector<AlignedPair> solved;
    std::vector<AnnotatedCase> unsolved;

    bool contains_pair(const std::string& query, const std::string& proposal) const;

    friend bool operator==(const Curriculum&, const Curriculum&) = default;
};

/// Sorts cases by case_id; the canonical processing order.
void sort_canonical(std::vector<AnnotatedCase>& cases);

}  // namespace iga
