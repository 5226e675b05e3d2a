#pragma once

#include <string>
#include <vector>

namespace iga {

struct ProcessResult {
    int exit_code = -1;  // 128 + signal number when killed by a signal
    std::string out;
    std::string err;
};

/// Runs argv[0] (PATH lookup applies) feeding `input` on stdin and
/// capturing stdout/stderr. Throws std::system_error if the process cannot
/// be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input = {});

}  // namespace iga
