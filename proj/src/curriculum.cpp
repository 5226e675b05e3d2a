#include "iga/curriculum.hpp"

#include "iga/error.hpp"
#include "iga/text.hpp"

#include <algorithm>

namespace iga {

namespace {

const std::string& require_string(const nlohmann::json& j, const char* key, bool non_empty = true) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) throw SchemaError(key, "missing or not a string");
    if (non_empty && text::trim(it->get_ref<const std::string&>()).empty()) {
        throw SchemaError(key, "must not be empty");
    }
    return it->get_ref<const std::string&>();
}

}  // namespace

nlohmann::json AnnotatedCase::to_json() const {
    nlohmann::json j = {{"case_id", case_id},
                        {"query", query},
                        {"reference_answer", reference_answer},
                        {"graph", iga::to_json(graph)}};
    if (duplicate_of) {
        j["origin"] = {{"duplicate_of", *duplicate_of}, {"seed_id", seed_id}};
    } else {
        j["origin"] = "seed";
    }
    return j;
}

AnnotatedCase AnnotatedCase::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("", "case must be an object");
    AnnotatedCase c;
    c.case_id = require_string(j, "case_id");
    c.query = require_string(j, "query");
    c.reference_answer = require_string(j, "reference_answer");
    auto graph = j.find("graph");
    if (graph == j.end()) throw SchemaError("graph", "missing");
    try {
        c.graph = graph_from_json(*graph);
    } catch (const ParseError& e) {
        throw SchemaError("graph", e.what());
    }
    auto origin = j.find("origin");
    if (origin == j.end() || (origin->is_string() && *origin == "seed")) {
        c.seed_id = c.case_id;
    } else if (origin->is_object()) {
        c.duplicate_of = require_string(*origin, "duplicate_of");
        c.seed_id = origin->contains("seed_id") ? require_string(*origin, "seed_id") : *c.duplicate_of;
    } else {
        throw SchemaError("origin", "must be \"seed\" or {\"duplicate_of\": ...}");
    }
    return c;
}

nlohmann::json AlignedPair::to_json() const {
    return {{"query", query},
            {"proposal", proposal},
            {"stage", static_cast<int>(stage)},
            {"proposer", proposer.key()},
            {"iteration", iteration}};
}

AlignedPair AlignedPair::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("", "pair must be an object");
    AlignedPair p;
    p.query = require_string(j, "query");
    p.proposal = require_string(j, "proposal");
    const auto stage = j.value("stage", 0);
    if (stage < 1 || stage > 3) throw SchemaError("stage", "must be 1, 2 or 3");
    p.stage = static_cast<Stage>(stage);
    try {
        p.proposer = ModelRole::parse(require_string(j, "proposer"));
    } catch (const UnknownRole& e) {
        throw SchemaError("proposer", e.what());
    }
    p.iteration = j.value("iteration", 1u);
    return p;
}

bool Curriculum::contains_pair(const std::string& query, const std::string& proposal) const {
    return std::any_of(solved.begin(), solved.end(), [&](const AlignedPair& p) {
        return p.query == query && p.proposal == proposal;
    });
}

void sort_canonical(std::vector<AnnotatedCase>& cases) {
    std::stable_sort(cases.begin(), cases.end(),
                     [](const AnnotatedCase& a, const AnnotatedCase& b) { return a.case_id < b.case_id; });
}

}  // namespace iga
