#include "iga/templates.hpp"

#include "iga/error.hpp"
#include "iga/fsutil.hpp"

#include <set>
#include <vector>

namespace iga {

namespace {

struct Spec {
    const char* name;
    std::vector<std::string> required;
    const char* text;
};

const std::vector<Spec>& specs() {
    static const std::vector<Spec> kSpecs = {
        {"naive_answer", {"query"}, "{query}\n"},
        {"self_eval",
         {"rule", "query", "answer"},
         "Check whether a response follows a rule.\n"
         "Rule: {rule}\n"
         "Query: {query}\n"
         "Response:\n{answer}\n"
         "Does the response follow the rule? Begin your reply with the verdict ACCEPT or REJECT, "
         "then give a one-sentence reason.\n"},
        {"graph_init",
         {"rule", "query"},
         "Rule: {rule}\n"
         "Query: {query}\n"
         "Lay out the reasoning a rule-following response to this query needs, as a logical graph. "
         "Reply with a JSON list of [entity, relation, entity] triplets.\n"},
        {"graph_init_strict",
         {"rule", "query"},
         "Rule: {rule}\n"
         "Query: {query}\n"
         "Your previous reply could not be read as a graph. Reply ONLY with a JSON array of "
         "triplets, for example [[\"subject\", \"relation\", \"object\"]], with no other text.\n"},
        {"graph_refine",
         {"rule", "query", "graph_narration"},
         "Rule: {rule}\n"
         "Query: {query}\n"
         "Current reasoning graph:\n{graph_narration}\n"
         "Refine the graph: correct wrong links, add missing reasoning steps and drop irrelevant "
         "ones. Reply with the complete JSON list of [entity, relation, entity] triplets.\n"},
        {"graph_refine_strict",
         {"rule", "query", "graph_narration"},
         "Rule: {rule}\n"
         "Query: {query}\n"
         "Current reasoning graph:\n{graph_narration}\n"
         "Your previous reply could not be read as a graph. Reply ONLY with the refined JSON array "
         "of triplets, for example [[\"subject\", \"relation\", \"object\"]], with no other text.\n"},
        {"graph_answer",
         {"rule", "query", "graph_narration"},
         "Rule: {rule}\n"
         "Query: {query}\n"
         "Reasoning graph:\n{graph_narration}\n"
         "Following the reasoning graph, write the response to the query that honors the rule.\n"},
        {"propose_direct", {"query"}, "Query: {query}\nRespond to the query.\n"},
        {"propose_hinted",
         {"query", "graph_narration"},
         "Query: {query}\n"
         "Hint (reasoning behind a rule-following response):\n{graph_narration}\n"
         "Respond to the query.\n"},
        {"propose_guided",
         {"query", "graph_narration", "reference"},
         "Query: {query}\n"
         "Hint (reasoning behind a rule-following response):\n{graph_narration}\n"
         "Reference answer:\n{reference}\n"
         "Write your own response that captures the same reasoning as the reference answer, "
         "in different words.\n"},
        {"check_alignment",
         {"rule", "query", "reference", "proposal"},
         "Judge whether a proposed answer is aligned with a reference answer under a rule.\n"
         "Rule: {rule}\n"
         "Query: {query}\n"
         "Reference answer:\n{reference}\n"
         "Proposed answer:\n{proposal}\n"
         "Alignment means the same stance and reasoning, not identical wording. Begin your reply "
         "with the verdict ACCEPT or REJECT, then give a one-sentence reason.\n"},
    };
    return kSpecs;
}

bool is_ident_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Calls fn(start, end, name) for each `{ident}` occurrence.
template <typename Fn>
void scan_placeholders(std::string_view tmpl, Fn&& fn) {
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') continue;
        std::size_t j = i + 1;
        while (j < tmpl.size() && is_ident_char(tmpl[j])) ++j;
        if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
            fn(i, j + 1, tmpl.substr(i + 1, j - i - 1));
            i = j;
        }
    }
}

}  // namespace

TemplateSet::TemplateSet(std::string id, std::map<std::string, std::string, std::less<>> templates)
    : id_(std::move(id)), templates_(std::move(templates)) {
    validate();
}

void TemplateSet::validate() const {
    for (const auto& spec : specs()) {
        auto it = templates_.find(spec.name);
        if (it == templates_.end()) {
            throw ConfigError("template set '" + id_ + "' lacks template '" + spec.name + "'");
        }
        std::set<std::string, std::less<>> present;
        scan_placeholders(it->second, [&](std::size_t, std::size_t, std::string_view name) {
            present.emplace(name);
        });
        for (const auto& req : spec.required) {
            if (!present.contains(req)) {
                throw ConfigError("template '" + std::string(spec.name) + "' in set '" + id_ +
                                  "' must use {" + req + "}");
            }
        }
    }
}

TemplateSet TemplateSet::builtin() {
    std::map<std::string, std::string, std::less<>> t;
    for (const auto& spec : specs()) t.emplace(spec.name, spec.text);
    return TemplateSet("v1", std::move(t));
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
    std::map<std::string, std::string, std::less<>> t;
    for (const auto& spec : specs()) {
        const auto path = dir / (std::string(spec.name) + ".txt");
        if (!std::filesystem::exists(path)) {
            throw ConfigError("template file missing: " + path.string());
        }
        t.emplace(spec.name, read_file(path));
    }
    auto id = dir.filename().string();
    if (id.empty()) id = dir.parent_path().filename().string();
    return TemplateSet(std::move(id), std::move(t));
}

TemplateSet TemplateSet::resolve(const std::string& spec, const std::filesystem::path& base_dir) {
    if (spec.empty() || spec == "v1") return builtin();
    std::filesystem::path p(spec);
    if (p.is_relative()) p = base_dir / p;
    return load_dir(p);
}

const std::string& TemplateSet::raw(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw ConfigError("unknown template '" + std::string(name) + "'");
    return it->second;
}

std::string TemplateSet::render(std::string_view name, const Values& values) const {
    const auto& tmpl = raw(name);
    std::string out;
    std::size_t pos = 0;
    scan_placeholders(tmpl, [&](std::size_t start, std::size_t end, std::string_view key) {
        auto it = values.find(key);
        if (it == values.end()) {
            throw ConfigError("template '" + std::string(name) + "' needs a value for {" +
                              std::string(key) + "}");
        }
        out.append(tmpl, pos, start - pos);
        out += it->second;
        pos = end;
    });
    out.append(tmpl, pos);
    return out;
}

void TemplateSet::write_dir(const std::filesystem::path& dir) const {
    for (const auto& [name, body] : templates_) write_file_atomic(dir / (name + ".txt"), body);
}

}  // namespace iga
