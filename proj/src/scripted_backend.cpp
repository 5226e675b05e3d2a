#include "iga/scripted_backend.hpp"

#include "iga/error.hpp"
#include "iga/fsutil.hpp"

namespace iga {

namespace {

bool role_matches(const std::string& entry_role, const ModelRole& role) {
    if (entry_role == "*" || entry_role == role.key()) return true;
    if (entry_role == "student@*") return role.kind() == RoleKind::student && role.checkpoint_id().has_value();
    if (auto kind = role_kind_from_string(entry_role)) return *kind == role.kind();
    return false;
}

std::string render(const std::string& tmpl, const GenerationRequest& request, const std::smatch* groups) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find("{{", pos);
        if (open == std::string::npos) break;
        const auto close = tmpl.find("}}", open + 2);
        if (close == std::string::npos) break;
        out.append(tmpl, pos, open - pos);
        const auto name = tmpl.substr(open + 2, close - open - 2);
        if (name == "digest") {
            out += request.digest().substr(0, 12);
        } else if (name == "seed") {
            out += request.sampling.seed ? std::to_string(*request.sampling.seed) : "none";
        } else if (name.size() == 1 && name[0] >= '1' && name[0] <= '9' && groups &&
                   static_cast<std::size_t>(name[0] - '0') < groups->size()) {
            out += (*groups)[name[0] - '0'].str();
        } else {
            out.append(tmpl, open, close + 2 - open);
        }
        pos = close + 2;
    }
    out.append(tmpl, pos);
    return out;
}

}  // namespace

ScriptedBackend::ScriptedBackend(std::vector<Entry> entries, bool vision)
    : entries_(std::move(entries)), vision_(vision) {}

std::vector<ScriptedBackend::Entry> ScriptedBackend::parse_fixture(const nlohmann::json& fixture) {
    if (!fixture.is_array()) throw SchemaError("", "fixture must be a JSON array");
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < fixture.size(); ++i) {
        const auto& e = fixture[i];
        const auto where = "[" + std::to_string(i) + "]";
        if (!e.is_object()) throw SchemaError(where, "entry must be an object");
        Entry entry;
        entry.role = e.value("role", std::string("*"));
        if (entry.role != "*" && entry.role != "student@*") {
            try {
                if (!role_kind_from_string(entry.role)) ModelRole::parse(entry.role);
            } catch (const UnknownRole&) {
                throw SchemaError(where + ".role", "unknown role '" + entry.role + "'");
            }
        }
        auto resp = e.find("response");
        if (resp == e.end() || !resp->is_string()) throw SchemaError(where + ".response", "missing string");
        entry.response = resp->get<std::string>();
        auto match = e.find("match");
        if (match == e.end() || !match->is_object()) throw SchemaError(where + ".match", "missing object");
        if (auto s = match->find("substring"); s != match->end() && s->is_string()) {
            entry.pattern = s->get<std::string>();
        } else if (auto r = match->find("regex"); r != match->end() && r->is_string()) {
            entry.is_regex = true;
            entry.pattern = r->get<std::string>();
            try {
                entry.compiled = std::regex(entry.pattern, std::regex::ECMAScript);
            } catch (const std::regex_error& err) {
                throw SchemaError(where + ".match.regex", err.what());
            }
        } else {
            throw SchemaError(where + ".match", "needs a 'substring' or 'regex' string");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const nlohmann::json& fixture, bool vision) {
    return std::make_shared<ScriptedBackend>(parse_fixture(fixture), vision);
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path, bool vision) {
    auto j = nlohmann::json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw SchemaError(path.string(), "fixture file is not valid JSON");
    return from_json(j, vision);
}

std::string ScriptedBackend::complete(const GenerationRequest& request) {
    {
        std::lock_guard lock(mutex_);
        seen_.push_back(request);
    }
    const std::string haystack = request.system_rule + "\n\n" + request.user_content;
    for (const auto& entry : entries_) {
        if (!role_matches(entry.role, request.role)) continue;
        if (entry.is_regex) {
            std::smatch m;
            if (std::regex_search(haystack, m, entry.compiled)) return render(entry.response, request, &m);
        } else if (haystack.find(entry.pattern) != std::string::npos) {
            return render(entry.response, request, nullptr);
        }
    }
    throw ScriptMiss("no fixture entry matches request for role '" + request.role.key() +
                     "': " + haystack.substr(0, 200));
}

std::vector<GenerationRequest> ScriptedBackend::requests() const {
    std::lock_guard lock(mutex_);
    return seen_;
}

}  // namespace iga
