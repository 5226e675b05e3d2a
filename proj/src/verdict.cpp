#include "iga/verdict.hpp"

#include "iga/error.hpp"
#include "iga/text.hpp"

#include <cctype>

namespace iga {

bool parse_verdict(std::string_view judge_response) {
    std::size_t i = 0;
    while (i < judge_response.size()) {
        if (!std::isalpha(static_cast<unsigned char>(judge_response[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < judge_response.size() && std::isalpha(static_cast<unsigned char>(judge_response[j]))) ++j;
        const auto word = judge_response.substr(i, j - i);
        if (text::compare_ci(word, "accept") == 0) return true;
        if (text::compare_ci(word, "reject") == 0) return false;
        i = j;
    }
    throw VerdictUnparseable("judge reply carries no ACCEPT/REJECT verdict", std::string(judge_response));
}

}  // namespace iga
