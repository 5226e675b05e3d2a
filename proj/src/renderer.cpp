#include "iga/renderer.hpp"

#include "iga/process.hpp"

#include <system_error>

namespace iga {

GraphRenderer make_dot_renderer(std::filesystem::path executable) {
    return [exe = std::move(executable)](const LogicalGraph& g) -> std::optional<ImageAttachment> {
        try {
            auto result = run_process({exe.string(), "-Tpng"}, to_dot(g));
            if (result.exit_code != 0 || result.out.empty()) return std::nullopt;
            return ImageAttachment{std::move(result.out), "image/png"};
        } catch (const std::system_error&) {
            return std::nullopt;
        }
    };
}

}  // namespace iga
