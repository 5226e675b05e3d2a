#include "iga/igp.hpp"

#include "iga/error.hpp"
#include "iga/seeds.hpp"
#include "iga/verdict.hpp"

#include <stdexcept>

namespace iga {

namespace {
constexpr const char* kImagePlaceholder = "(the reasoning graph is attached as an image)";
}

std::string_view to_string(Modality m) { return m == Modality::image ? "image" : "text"; }

std::optional<Modality> modality_from_string(std::string_view s) {
    if (s == "text") return Modality::text;
    if (s == "image") return Modality::image;
    return std::nullopt;
}

IgpEngine::IgpEngine(Gateway& gateway, const TemplateSet& templates, IgpOptions options,
                     GraphRenderer renderer)
    : gateway_(gateway), templates_(templates), options_(options), renderer_(std::move(renderer)) {}

std::string IgpEngine::ask(const ModelRole& role, const std::string& rule, std::string user,
                           double temperature, std::string_view seed_context,
                           std::optional<ImageAttachment> image) const {
    GenerationRequest req;
    req.role = role;
    req.system_rule = rule;
    req.user_content = std::move(user);
    req.image = std::move(image);
    req.sampling.temperature = temperature;
    req.sampling.max_tokens = options_.max_tokens;
    req.sampling.seed = derive_seed(options_.seed, seed_context);
    return gateway_.generate(req);
}

IgpEngine::GraphView IgpEngine::present(const LogicalGraph& g, Modality modality) const {
    if (modality == Modality::image) {
        if (renderer_) {
            if (auto image = renderer_(g)) return {kImagePlaceholder, std::move(image), false};
        }
        ++downgrades_;
        return {narrate(g), std::nullopt, true};
    }
    return {narrate(g), std::nullopt, false};
}

bool IgpEngine::self_evaluate(const std::string& rule, const std::string& query,
                              const std::string& answer, const ModelRole& judge) const {
    const auto prompt = templates_.render("self_eval", {{"rule", rule}, {"query", query}, {"answer", answer}});
    return parse_verdict(ask(judge, rule, prompt, options_.judge_temperature, "igp/eval|" + query));
}

LogicalGraph IgpEngine::initialize_graph(const std::string& rule, const std::string& query,
                                         const ModelRole& teacher) const {
    const TemplateSet::Values values{{"rule", rule}, {"query", query}};
    const auto first = ask(teacher, rule, templates_.render("graph_init", values),
                           options_.graph_temperature, "igp/init|" + query);
    try {
        return parse_triplets(first);
    } catch (const ParseError&) {
    }
    const auto second = ask(teacher, rule, templates_.render("graph_init_strict", values),
                            options_.graph_temperature, "igp/init-strict|" + query);
    return parse_triplets(second);
}

LogicalGraph IgpEngine::refine_impl(const std::string& rule, const std::string& query,
                                    const LogicalGraph& g, const ModelRole& teacher, Modality modality,
                                    bool& downgraded) const {
    auto view = present(g, modality);
    downgraded = downgraded || view.downgraded;
    const TemplateSet::Values values{{"rule", rule}, {"query", query}, {"graph_narration", view.text}};
    const auto context = "|" + std::to_string(g.revision()) + "|" + query;
    const auto first = ask(teacher, rule, templates_.render("graph_refine", values),
                           options_.graph_temperature, "igp/refine" + context, view.image);
    std::optional<LogicalGraph> refined;
    try {
        refined = parse_triplets(first);
    } catch (const ParseError&) {
        const auto second = ask(teacher, rule, templates_.render("graph_refine_strict", values),
                                options_.graph_temperature, "igp/refine-strict" + context, view.image);
        refined = parse_triplets(second);
    }
    return refined->with_revision(g.revision() + 1);
}

LogicalGraph IgpEngine::refine_graph(const std::string& rule, const std::string& query,
                                     const LogicalGraph& g, const ModelRole& teacher,
                                     Modality modality) const {
    bool downgraded = false;
    return refine_impl(rule, query, g, teacher, modality, downgraded);
}

IgpResult IgpEngine::run_igp(const std::string& rule, const std::string& query, const ModelRole& teacher,
                             const ModelRole& judge, std::uint32_t k, Modality modality) const {
    if (k == 0) throw std::invalid_argument("IGP refinement cap k must be at least 1");
    IgpResult result;

    const auto naive = ask(teacher, rule, templates_.render("naive_answer", {{"query", query}}),
                           options_.answer_temperature, "igp/naive|" + query);
    bool accepted = false;
    try {
        accepted = self_evaluate(rule, query, naive, judge);
    } catch (const VerdictUnparseable&) {
        result.verdict_unparseable = true;
    }
    if (accepted) {
        result.answer = naive;
        result.accepted_naively = true;
        return result;
    }

    auto graph = initialize_graph(rule, query, teacher);
    while (result.iterations_used < k) {
        auto next = refine_impl(rule, query, graph, teacher, modality, result.modality_downgraded);
        ++result.iterations_used;
        const bool fixed_point = graphs_equal(next, graph);
        graph = std::move(next);
        if (fixed_point) break;
    }

    auto view = present(graph, modality);
    result.modality_downgraded = result.modality_downgraded || view.downgraded;
    const auto prompt = templates_.render(
        "graph_answer", {{"rule", rule}, {"query", query}, {"graph_narration", view.text}});
    result.answer = ask(teacher, rule, prompt, options_.answer_temperature, "igp/answer|" + query,
                        std::move(view.image));
    result.graph = std::move(graph);
    return result;
}

}  // namespace iga
