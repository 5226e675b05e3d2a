#include "iga/config.hpp"

#include "iga/error.hpp"
#include "iga/fsutil.hpp"
#include "iga/scripted_backend.hpp"
#include "iga/templates.hpp"
#include "iga/text.hpp"

namespace iga {

namespace fs = std::filesystem;

nlohmann::json default_config() {
    return nlohmann::json::parse(R"({
      "scenario": null,
      "work_dir": "work",
      "roles": {"teacher": "teacher", "student": "student-base", "helpers": [], "judge": null},
      "igp": {"k": 2, "modality": "auto", "renderer": null,
              "answer_temperature": 0.7, "graph_temperature": 0.0},
      "sail": {"T": 3, "n2": 3, "n3": 5, "stage1_temperature": 0.3, "stage23_temperature": 0.8},
      "judge_temperature": 0.0,
      "call_budget": 10000,
      "parallelism": 1,
      "max_tokens": 1024,
      "trainer": {"mode": "mock", "executable": null},
      "templates": "v1",
      "seed": 0,
      "backend": {"kind": "scripted", "fixtures": null, "vision": false,
                  "base_url": "http://localhost:8000/v1", "retries": 3, "timeout_seconds": 120}
    })");
}

namespace {

// Overlays `patch` onto `base`, rejecting keys the defaults do not declare.
void merge_declared(nlohmann::json& base, const nlohmann::json& patch, const std::string& prefix) {
    if (!patch.is_object()) throw ConfigError((prefix.empty() ? "config" : prefix) + " must be an object");
    for (const auto& [key, value] : patch.items()) {
        const auto path = prefix.empty() ? key : prefix + "." + key;
        if (!base.contains(key)) throw ConfigError("unknown config key '" + path + "'");
        if (base[key].is_object()) {
            merge_declared(base[key], value, path);
        } else {
            base[key] = value;
        }
    }
}

template <typename T>
T get_as(const nlohmann::json& j, const std::string& path) {
    try {
        return j.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + path + "' has the wrong type");
    }
}

const nlohmann::json& at_path(const nlohmann::json& j, const std::string& dotted) {
    const nlohmann::json* cur = &j;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        cur = &cur->at(dotted.substr(start, dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return *cur;
}

std::optional<fs::path> opt_path(const nlohmann::json& j, const std::string& key, const fs::path& base) {
    const auto& v = at_path(j, key);
    if (v.is_null()) return std::nullopt;
    fs::path p(get_as<std::string>(v, key));
    return p.is_relative() ? base / p : p;
}

std::uint32_t positive_u32(const nlohmann::json& j, const std::string& key) {
    const auto& v = at_path(j, key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
        throw ConfigError("config key '" + key + "' must be a positive integer");
    }
    return v.get<std::uint32_t>();
}

double non_negative(const nlohmann::json& j, const std::string& key) {
    const auto& v = at_path(j, key);
    if (!v.is_number() || v.get<double>() < 0.0) throw ConfigError("config key '" + key + "' must be >= 0");
    return v.get<double>();
}

}  // namespace

void apply_override(nlohmann::json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw UsageError("override '" + assignment + "' must look like key=value");
    }
    const auto key = text::trim(assignment.substr(0, eq));
    const auto raw = assignment.substr(eq + 1);

    const auto schema = default_config();
    const nlohmann::json* declared = &schema;
    nlohmann::json* target = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const auto part = key.substr(start, dot - start);
        if (!declared->is_object() || !declared->contains(part)) {
            throw UsageError("override key '" + key + "' is not a config key");
        }
        declared = &(*declared)[part];
        if (!target->is_object()) *target = nlohmann::json::object();
        target = &(*target)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (declared->is_object()) throw UsageError("override key '" + key + "' names a section, not a value");
    auto value = nlohmann::json::parse(raw, nullptr, false);
    *target = value.is_discarded() ? nlohmann::json(raw) : value;
}

std::string RunConfig::digest() const {
    auto j = effective;
    j.erase("work_dir");
    return text::sha256_hex(j.dump());
}

RunConfig config_from_json(const nlohmann::json& doc, const fs::path& config_dir, const ConfigOverrides& overrides) {
    auto file_doc = doc;
    for (const auto& s : overrides.set) apply_override(file_doc, s);
    if (overrides.backend) file_doc["backend"]["kind"] = *overrides.backend;
    if (overrides.fixtures) file_doc["backend"]["fixtures"] = fs::absolute(*overrides.fixtures).string();

    auto j = default_config();
    merge_declared(j, file_doc, "");

    RunConfig c;
    c.config_dir = config_dir;
    c.effective = j;

    if (j["scenario"].is_null()) throw ConfigError("config key 'scenario' is required");
    c.scenario_path = *opt_path(j, "scenario", config_dir);
    c.scenario = load_scenario(c.scenario_path);
    if (c.scenario.train_queries.empty()) {
        throw ConfigError("scenario '" + c.scenario.name + "' has zero training queries");
    }

    if (overrides.work_dir) {
        c.work_dir = fs::absolute(*overrides.work_dir);
    } else {
        c.work_dir = *opt_path(j, "work_dir", config_dir);
    }

    const auto& roles = j["roles"];
    c.roles.teacher = get_as<std::string>(roles["teacher"], "roles.teacher");
    c.roles.student = get_as<std::string>(roles["student"], "roles.student");
    c.roles.helpers = get_as<std::vector<std::string>>(roles["helpers"], "roles.helpers");
    if (!roles["judge"].is_null()) c.roles.judge = get_as<std::string>(roles["judge"], "roles.judge");
    if (c.roles.student.empty()) throw ConfigError("roles.student must name the base model");

    c.k = positive_u32(j, "igp.k");
    c.modality = get_as<std::string>(j["igp"]["modality"], "igp.modality");
    if (c.modality != "auto" && c.modality != "text" && c.modality != "image") {
        throw ConfigError("igp.modality must be auto, text or image");
    }
    c.renderer = opt_path(j, "igp.renderer", config_dir);
    c.answer_temperature = non_negative(j, "igp.answer_temperature");
    c.graph_temperature = non_negative(j, "igp.graph_temperature");
    c.judge_temperature = non_negative(j, "judge_temperature");

    c.T = positive_u32(j, "sail.T");
    c.n2 = positive_u32(j, "sail.n2");
    c.n3 = positive_u32(j, "sail.n3");
    c.stage1_temperature = non_negative(j, "sail.stage1_temperature");
    c.stage23_temperature = non_negative(j, "sail.stage23_temperature");

    c.call_budget = positive_u32(j, "call_budget");
    c.parallelism = positive_u32(j, "parallelism");
    c.max_tokens = static_cast<int>(positive_u32(j, "max_tokens"));

    c.trainer_mode = get_as<std::string>(j["trainer"]["mode"], "trainer.mode");
    c.trainer_executable = opt_path(j, "trainer.executable", config_dir);
    if (c.trainer_mode == "subprocess") {
        if (!c.trainer_executable || !fs::exists(*c.trainer_executable)) {
            throw ConfigError("trainer.mode subprocess needs an existing trainer.executable");
        }
    } else if (c.trainer_mode != "mock") {
        throw ConfigError("trainer.mode must be mock or subprocess");
    }

    c.templates = get_as<std::string>(j["templates"], "templates");
    TemplateSet::resolve(c.templates, config_dir);
    const auto& seed = j["seed"];
    if (!seed.is_number_integer()) throw ConfigError("config key 'seed' must be an integer");
    c.seed = seed.get<std::int64_t>();

    const auto& b = j["backend"];
    c.backend.kind = get_as<std::string>(b["kind"], "backend.kind");
    c.backend.fixtures = opt_path(j, "backend.fixtures", config_dir);
    c.backend.vision = get_as<bool>(b["vision"], "backend.vision");
    c.backend.base_url = get_as<std::string>(b["base_url"], "backend.base_url");
    c.backend.retries = static_cast<int>(positive_u32(j, "backend.retries"));
    c.backend.timeout_seconds = static_cast<int>(positive_u32(j, "backend.timeout_seconds"));
    if (c.backend.kind == "scripted") {
        if (!c.backend.fixtures) throw ConfigError("scripted backend needs backend.fixtures (or --fixtures)");
        if (!fs::exists(*c.backend.fixtures)) {
            throw ConfigError("fixture file not found: " + c.backend.fixtures->string());
        }
        ScriptedBackend::from_file(*c.backend.fixtures);
    } else if (c.backend.kind != "http") {
        throw ConfigError("backend.kind must be scripted or http");
    }
    return c;
}

RunConfig load_config(const fs::path& path, const ConfigOverrides& overrides) {
    std::string body;
    try {
        body = read_file(path);
    } catch (const std::exception&) {
        throw ConfigError("cannot read config file " + path.string());
    }
    auto doc = nlohmann::json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config file " + path.string() + " is not valid JSON");
    return config_from_json(doc, fs::absolute(path).parent_path(), overrides);
}

}  // namespace iga
