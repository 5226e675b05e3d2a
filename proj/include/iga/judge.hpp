#pragma once

#include "iga/gateway.hpp"
#include "iga/templates.hpp"

#include <string>

namespace iga {

enum class Verdict { aligned, not_aligned, unparseable };

/// Asks `judge` whether `proposal` agrees with `reference` under `rule`.
/// Gateway errors propagate; a reply without a verdict maps to unparseable.
Verdict judge_alignment(Gateway& gateway, const TemplateSet& templates, const ModelRole& judge,
                        const std::string& rule, const std::string& query, const std::string& reference,
                        const std::string& proposal, const Sampling& sampling);

}  // namespace iga
