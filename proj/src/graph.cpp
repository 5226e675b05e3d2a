#include "iga/graph.hpp"

#include "iga/error.hpp"
#include "iga/text.hpp"

#include <algorithm>
#include <map>

namespace iga {

namespace {

struct CiLess {
    bool operator()(const std::string& a, const std::string& b) const {
        return text::compare_ci(a, b) < 0;
    }
};

// Bracket-balanced span of a JSON array starting at `open`, honoring
// string literals; npos when unbalanced.
std::size_t matching_bracket(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '[') {
            ++depth;
        } else if (c == ']') {
            if (--depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

std::optional<nlohmann::json> first_json_array(std::string_view s) {
    for (auto open = s.find('['); open != std::string_view::npos; open = s.find('[', open + 1)) {
        const auto close = matching_bracket(s, open);
        if (close == std::string_view::npos) continue;
        auto parsed = nlohmann::json::parse(s.substr(open, close - open + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_array()) return parsed;
    }
    return std::nullopt;
}

std::optional<Triplet> triplet_from_element(const nlohmann::json& e) {
    if (e.is_array()) {
        if (e.size() != 3) return std::nullopt;
        for (const auto& f : e) {
            if (!f.is_string()) return std::nullopt;
        }
        return Triplet::make(e[0].get_ref<const std::string&>(), e[1].get_ref<const std::string&>(),
                             e[2].get_ref<const std::string&>());
    }
    if (e.is_object()) {
        auto field = [&](const char* key) -> const std::string* {
            auto it = e.find(key);
            return (it != e.end() && it->is_string()) ? &it->get_ref<const std::string&>() : nullptr;
        };
        const auto* s = field("subject");
        const auto* r = field("relation");
        const auto* o = field("object");
        if (!s || !r || !o) return std::nullopt;
        return Triplet::make(*s, *r, *o);
    }
    return std::nullopt;
}

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::optional<Triplet> Triplet::make(std::string_view subject, std::string_view relation,
                                     std::string_view object) {
    auto s = text::normalize_space(subject);
    auto r = text::normalize_space(relation);
    auto o = text::normalize_space(object);
    if (s.empty() || r.empty() || o.empty()) return std::nullopt;
    return Triplet(std::move(s), std::move(r), std::move(o));
}

int compare_ci(const Triplet& a, const Triplet& b) {
    if (int c = text::compare_ci(a.subject_, b.subject_)) return c;
    if (int c = text::compare_ci(a.relation_, b.relation_)) return c;
    return text::compare_ci(a.object_, b.object_);
}

LogicalGraph::LogicalGraph(std::vector<Triplet> triplets, std::uint32_t revision)
    : triplets_(std::move(triplets)), revision_(revision) {
    // stable sort + unique keeps the first-seen casing of each duplicate group
    std::stable_sort(triplets_.begin(), triplets_.end(),
                     [](const Triplet& a, const Triplet& b) { return compare_ci(a, b) < 0; });
    auto last = std::unique(triplets_.begin(), triplets_.end(),
                            [](const Triplet& a, const Triplet& b) { return compare_ci(a, b) == 0; });
    triplets_.erase(last, triplets_.end());
}

LogicalGraph LogicalGraph::with_revision(std::uint32_t revision) const {
    LogicalGraph g = *this;
    g.revision_ = revision;
    return g;
}

LogicalGraph parse_triplets(std::string_view raw_model_output) {
    auto array = first_json_array(raw_model_output);
    if (!array) {
        throw ParseError("no JSON array found in model output", std::string(raw_model_output));
    }
    std::vector<Triplet> triplets;
    for (const auto& element : *array) {
        if (auto t = triplet_from_element(element)) triplets.push_back(std::move(*t));
    }
    if (triplets.empty()) {
        throw ParseError("JSON array holds no well-formed triplet", std::string(raw_model_output));
    }
    return LogicalGraph(std::move(triplets), 0);
}

bool graphs_equal(const LogicalGraph& a, const LogicalGraph& b) {
    return std::equal(a.triplets().begin(), a.triplets().end(), b.triplets().begin(),
                      b.triplets().end(),
                      [](const Triplet& x, const Triplet& y) { return compare_ci(x, y) == 0; });
}

std::string narrate(const LogicalGraph& g) {
    std::string out;
    for (const auto& t : g.triplets()) {
        if (!out.empty()) out.push_back('\n');
        out += t.subject() + " --[" + t.relation() + "]--> " + t.object();
    }
    return out;
}

std::string to_dot(const LogicalGraph& g) {
    // entity -> displayed label; the first occurrence in canonical triplet order wins
    std::map<std::string, std::string, CiLess> entities;
    for (const auto& t : g.triplets()) {
        entities.try_emplace(t.subject(), t.subject());
        entities.try_emplace(t.object(), t.object());
    }
    std::map<std::string, std::size_t, CiLess> ids;
    std::string out = "digraph G {\n";
    for (const auto& [key, label] : entities) {
        const auto id = ids.size();
        ids.emplace(key, id);
        out += "  n" + std::to_string(id) + " [label=" + dot_quote(label) + "];\n";
    }
    for (const auto& t : g.triplets()) {
        out += "  n" + std::to_string(ids.at(t.subject())) + " -> n" +
               std::to_string(ids.at(t.object())) + " [label=" + dot_quote(t.relation()) + "];\n";
    }
    out += "}\n";
    return out;
}

nlohmann::json to_json(const LogicalGraph& g) {
    auto triplets = nlohmann::json::array();
    for (const auto& t : g.triplets()) {
        triplets.push_back({t.subject(), t.relation(), t.object()});
    }
    return {{"triplets", std::move(triplets)}, {"revision", g.revision()}};
}

LogicalGraph graph_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("triplets") || !j["triplets"].is_array()) {
        throw ParseError("graph JSON lacks a triplets array", j.dump());
    }
    std::vector<Triplet> triplets;
    for (const auto& e : j["triplets"]) {
        auto t = triplet_from_element(e);
        if (!t) throw ParseError("malformed triplet in graph JSON", e.dump());
        triplets.push_back(std::move(*t));
    }
    const auto revision = j.value("revision", 0u);
    return LogicalGraph(std::move(triplets), revision);
}

}  // namespace iga
