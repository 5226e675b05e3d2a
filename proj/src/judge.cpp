#include "iga/judge.hpp"

#include "iga/error.hpp"
#include "iga/verdict.hpp"

namespace iga {

Verdict judge_alignment(Gateway& gateway, const TemplateSet& templates, const ModelRole& judge,
                        const std::string& rule, const std::string& query, const std::string& reference,
                        const std::string& proposal, const Sampling& sampling) {
    GenerationRequest req;
    req.role = judge;
    req.system_rule = rule;
    req.user_content = templates.render(
        "check_alignment",
        {{"rule", rule}, {"query", query}, {"reference", reference}, {"proposal", proposal}});
    req.sampling = sampling;
    try {
        return parse_verdict(gateway.generate(req)) ? Verdict::aligned : Verdict::not_aligned;
    } catch (const VerdictUnparseable&) {
        return Verdict::unparseable;
    }
}

}  // namespace iga
