#pragma once

#include <ostream>

namespace iga {

/// Entry point behind the `iga` executable.
/// Exit codes: 0 success, 1 domain error, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace iga
