#pragma once

#include "iga/text.hpp"

#include <cstdint>
#include <string>
#include <string_view>

namespace iga {

/// Per-request sampling seed derived from the run seed and a context label,
/// so that every prompt in a run has a reproducible seed of its own.
inline std::int64_t derive_seed(std::int64_t run_seed, std::string_view context) {
    const auto h = text::fnv1a64(std::to_string(run_seed) + "|" + std::string(context));
    return static_cast<std::int64_t>(h & 0x7fffffffULL);
}

}  // namespace iga
