#pragma once

#include "iga/gateway.hpp"
#include "iga/graph.hpp"
#include "iga/renderer.hpp"
#include "iga/templates.hpp"

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace iga {

/// How a graph is shown to the model: as its narration or as a rendered image.
enum class Modality { text, image };

std::string_view to_string(Modality m);
std::optional<Modality> modality_from_string(std::string_view s);

struct IgpOptions {
    double answer_temperature = 0.7;
    double graph_temperature = 0.0;
    double judge_temperature = 0.0;
    int max_tokens = 1024;
    std::int64_t seed = 0;
};

struct IgpResult {
    std::string answer;
    /// Absent when the naive answer was accepted.
    std::optional<LogicalGraph> graph;
    std::uint32_t iterations_used = 0;
    bool accepted_naively = false;
    /// Image modality was asked for but no image could be produced.
    bool modality_downgraded = false;
    /// The judge's self-evaluation reply had no verdict (counted as rejection).
    bool verdict_unparseable = false;
};

/// Graph-guided prompting: self-check a naive answer, and when it is
/// rejected build a reasoning graph, refine it to a fixed point (at most k
/// rounds), then answer conditioned on the final graph.
class IgpEngine {
public:
    IgpEngine(Gateway& gateway, const TemplateSet& templates, IgpOptions options = {},
              GraphRenderer renderer = {});

    /// True iff the judge's first verdict word is ACCEPT. Throws VerdictUnparseable.
    bool self_evaluate(const std::string& rule, const std::string& query, const std::string& answer,
                       const ModelRole& judge) const;

    /// One reprompt with a stricter format reminder before ParseError escapes.
    LogicalGraph initialize_graph(const std::string& rule, const std::string& query,
                                  const ModelRole& teacher) const;

    /// Returns the refined graph with revision g.revision() + 1.
    LogicalGraph refine_graph(const std::string& rule, const std::string& query, const LogicalGraph& g,
                              const ModelRole& teacher, Modality modality) const;

    IgpResult run_igp(const std::string& rule, const std::string& query, const ModelRole& teacher,
                      const ModelRole& judge, std::uint32_t k, Modality modality) const;

    /// Image requests that fell back to narration since construction.
    std::uint64_t downgrades() const noexcept { return downgrades_.load(); }

private:
    struct GraphView {
        std::string text;
        std::optional<ImageAttachment> image;
        bool downgraded = false;
    };

    GraphView present(const LogicalGraph& g, Modality modality) const;
    LogicalGraph refine_impl(const std::string& rule, const std::string& query, const LogicalGraph& g,
                             const ModelRole& teacher, Modality modality, bool& downgraded) const;
    std::string ask(const ModelRole& role, const std::string& rule, std::string user, double temperature,
                    std::string_view seed_context, std::optional<ImageAttachment> image = {}) const;

    Gateway& gateway_;
    const TemplateSet& templates_;
    IgpOptions options_;
    GraphRenderer renderer_;
    mutable std::atomic<std::uint64_t> downgrades_{0};
};

}  // namespace iga
