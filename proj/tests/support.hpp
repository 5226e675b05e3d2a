#pragma once

#include "iga/checkpoint.hpp"
#include "iga/gateway.hpp"
#include "iga/graph.hpp"
#include "iga/scripted_backend.hpp"
#include "iga/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace iga::test_support {

inline std::filesystem::path source_path(const std::string& rel) {
    return std::filesystem::path(IGA_SOURCE_DIR) / rel;
}

class TempDir {
public:
    TempDir() {
        std::string tmpl = (std::filesystem::temp_directory_path() / "iga-test-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
        path_ = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& body) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << body;
}

inline void write_script(const std::filesystem::path& p, const std::string& body) {
    write_text(p, body);
    std::filesystem::permissions(p, std::filesystem::perms::owner_all | std::filesystem::perms::group_read |
                                        std::filesystem::perms::others_read);
}

/// {"role", "match": {"substring"|"regex"}, "response"} entry.
inline nlohmann::json entry(const std::string& role, const std::string& substring, const std::string& response) {
    return {{"role", role}, {"match", {{"substring", substring}}}, {"response", response}};
}

inline nlohmann::json regex_entry(const std::string& role, const std::string& regex, const std::string& response) {
    return {{"role", role}, {"match", {{"regex", regex}}}, {"response", response}};
}

inline std::shared_ptr<ScriptedBackend> scripted(const nlohmann::json& fixture, bool vision = false) {
    return ScriptedBackend::from_json(fixture, vision);
}

/// Gateway with every role kind bound to `backend` and no real sleeping.
inline std::unique_ptr<Gateway> make_gateway(std::shared_ptr<Backend> backend,
                                             std::shared_ptr<const CheckpointStore> store = nullptr,
                                             std::uint64_t budget = 10'000, std::size_t parallelism = 1) {
    GatewayOptions opts;
    opts.call_budget = budget;
    opts.parallelism = parallelism;
    opts.sleep = [](std::chrono::milliseconds) {};
    if (!store) store = std::make_shared<CheckpointStore>(std::filesystem::temp_directory_path() / "iga-none");
    auto gw = std::make_unique<Gateway>(opts, std::move(store));
    for (auto kind : {RoleKind::teacher_vlm, RoleKind::student, RoleKind::helper, RoleKind::judge}) {
        gw->bind(kind, backend);
    }
    return gw;
}

/// Random graphs over a small vocabulary so that case-variant duplicates,
/// shared entities and whitespace noise all occur often.
class GraphGenerator {
public:
    explicit GraphGenerator(std::uint64_t seed) : rng_(seed) {}

    std::string word() {
        static const std::vector<std::string> kWords = {"rule",  "query", "Answer", "brand", "category",
                                                        "user",  "risk",  "price",  "Safety", "model",
                                                        "a b",   "x\"y",  "back\\slash", "ümlaut"};
        auto w = kWords[pick(kWords.size())];
        if (pick(4) == 0) {
            for (auto& ch : w) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        }
        if (pick(5) == 0) w = "  " + w + " ";
        return w;
    }

    Triplet triplet() {
        while (true) {
            if (auto t = Triplet::make(word(), word(), word())) return *t;
        }
    }

    LogicalGraph graph() {
        std::vector<Triplet> ts;
        const auto n = pick(8);
        for (std::size_t i = 0; i < n; ++i) ts.push_back(triplet());
        return LogicalGraph(std::move(ts), static_cast<std::uint32_t>(pick(4)));
    }

    /// Same triplet set as `g`, shuffled, with random case changes and repeats.
    LogicalGraph variant(const LogicalGraph& g) {
        std::vector<Triplet> ts;
        for (const auto& t : g.triplets()) {
            const auto copies = 1 + pick(2);
            for (std::size_t c = 0; c < copies; ++c) {
                ts.push_back(*Triplet::make(recase(t.subject()), recase(t.relation()), recase(t.object())));
            }
        }
        std::shuffle(ts.begin(), ts.end(), rng_);
        return LogicalGraph(std::move(ts), static_cast<std::uint32_t>(pick(4)));
    }

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

private:
    std::string recase(std::string s) {
        for (auto& ch : s) {
            if (pick(3) == 0) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
            else if (pick(3) == 0) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
        return s;
    }

    std::mt19937_64 rng_;
};

}  // namespace iga::test_support
