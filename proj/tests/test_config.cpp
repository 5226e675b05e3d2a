#include "iga/config.hpp"
#include "iga/error.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace iga;
using namespace iga::test_support;

namespace {

/// Scenario and fixture files next to a config document in a temp dir.
struct ConfigDir {
    TempDir dir;

    ConfigDir() {
        write_text(dir / "scenario.json", nlohmann::json{{"name", "s"},
                                                         {"rule", "Never recommend a brand."},
                                                         {"train_queries", {"Which phone?"}},
                                                         {"test_items", nlohmann::json::array()}}
                                              .dump());
        write_text(dir / "fixtures.json", nlohmann::json::array({entry("*", "", "ok")}).dump());
    }

    nlohmann::json doc() const {
        return {{"scenario", "scenario.json"}, {"backend", {{"fixtures", "fixtures.json"}}}};
    }

    RunConfig load(const nlohmann::json& d, const ConfigOverrides& o = {}) const {
        return config_from_json(d, dir.path(), o);
    }
};

}  // namespace

TEST(Config, DefaultsFillEverythingNotGiven) {
    ConfigDir d;
    const auto c = d.load(d.doc());
    EXPECT_EQ(c.k, 2u);
    EXPECT_EQ(c.T, 3u);
    EXPECT_EQ(c.n2, 3u);
    EXPECT_EQ(c.n3, 5u);
    EXPECT_EQ(c.modality, "auto");
    EXPECT_EQ(c.call_budget, 10'000u);
    EXPECT_EQ(c.roles.student, "student-base");
    EXPECT_FALSE(c.roles.judge);
    EXPECT_EQ(c.templates, "v1");
    EXPECT_EQ(c.scenario_path, d.dir / "scenario.json");
    EXPECT_EQ(c.work_dir, d.dir / "work");
    EXPECT_EQ(c.effective["sail"]["stage23_temperature"], 0.8);
}

TEST(Config, UnknownKeysAndBadValuesAreRejected) {
    ConfigDir d;
    auto doc = d.doc();
    doc["sail"]["n4"] = 1;
    EXPECT_THROW(d.load(doc), ConfigError);

    for (const auto& [key, value] : std::vector<std::pair<std::string, nlohmann::json>>{
             {"/sail/T", 0}, {"/igp/k", -1}, {"/igp/modality", "audio"}, {"/sail/n2", "three"},
             {"/trainer/mode", "cloud"}, {"/backend/kind", "grpc"}, {"/seed", 1.5}, {"/judge_temperature", -0.1}}) {
        doc = d.doc();
        doc[nlohmann::json::json_pointer(key)] = value;
        EXPECT_THROW(d.load(doc), ConfigError) << key;
    }
}

TEST(Config, OverridesApplyBeforeValidation) {
    ConfigDir d;
    ConfigOverrides o;
    o.set = {"sail.n2=4", "roles.helpers=[\"h1\",\"h2\"]", "roles.judge=grader", "work_dir=elsewhere"};
    const auto c = d.load(d.doc(), o);
    EXPECT_EQ(c.n2, 4u);
    EXPECT_EQ(c.roles.helpers, (std::vector<std::string>{"h1", "h2"}));
    EXPECT_EQ(*c.roles.judge, "grader");
    EXPECT_EQ(c.work_dir, d.dir / "elsewhere");

    for (const auto* bad : {"sail.n9=1", "nokey", "=3", "sail=1"}) {
        o.set = {bad};
        EXPECT_THROW(d.load(d.doc(), o), UsageError) << bad;
    }
}

TEST(Config, DigestIgnoresWorkDirOnly) {
    ConfigDir d;
    ConfigOverrides o;
    const auto a = d.load(d.doc());
    o.set = {"work_dir=other"};
    EXPECT_EQ(d.load(d.doc(), o).digest(), a.digest());
    o.set = {"seed=3"};
    EXPECT_NE(d.load(d.doc(), o).digest(), a.digest());
}

TEST(Config, ScenarioProblems) {
    ConfigDir d;
    auto doc = d.doc();
    doc.erase("scenario");
    EXPECT_THROW(d.load(doc), ConfigError);

    doc = d.doc();
    doc["scenario"] = "absent.json";
    EXPECT_THROW(d.load(doc), SchemaError);

    write_text(d.dir / "empty.json", nlohmann::json{{"name", "e"},
                                                    {"rule", "r"},
                                                    {"train_queries", nlohmann::json::array()},
                                                    {"test_items", nlohmann::json::array()}}
                                         .dump());
    doc["scenario"] = "empty.json";
    EXPECT_THROW(d.load(doc), ConfigError);
}

TEST(Config, ScriptedBackendNeedsReadableFixtures) {
    ConfigDir d;
    auto doc = d.doc();
    doc["backend"].erase("fixtures");
    EXPECT_THROW(d.load(doc), ConfigError);
    doc["backend"]["fixtures"] = "missing.json";
    EXPECT_THROW(d.load(doc), ConfigError);
    write_text(d.dir / "broken.json", "[{\"role\": \"*\"}]");
    doc["backend"]["fixtures"] = "broken.json";
    EXPECT_THROW(d.load(doc), SchemaError);

    doc["backend"] = {{"kind", "http"}};
    EXPECT_EQ(d.load(doc).backend.kind, "http");  // no fixtures needed
}

TEST(Config, SubprocessTrainerNeedsExecutable) {
    ConfigDir d;
    auto doc = d.doc();
    doc["trainer"] = {{"mode", "subprocess"}, {"executable", "train.sh"}};
    EXPECT_THROW(d.load(doc), ConfigError);
    write_script(d.dir / "train.sh", "#!/bin/sh\n");
    EXPECT_EQ(*d.load(doc).trainer_executable, d.dir / "train.sh");
}

TEST(Config, LoadsTheToyConfig) {
    const auto c = load_config(source_path("data/toy/config.json"));
    EXPECT_EQ(c.scenario.train_queries.size(), 10u);
    EXPECT_EQ(c.roles.helpers, (std::vector<std::string>{"helper-a"}));
    EXPECT_EQ(c.seed, 7);
    EXPECT_THROW(load_config(source_path("data/toy/nope.json")), ConfigError);
}
