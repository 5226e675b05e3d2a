#pragma once

#include <string_view>

namespace iga {

/// Reads the first ACCEPT/REJECT word (case-insensitive) out of a judge
/// reply. Throws VerdictUnparseable when neither appears.
bool parse_verdict(std::string_view judge_response);

}  // namespace iga
