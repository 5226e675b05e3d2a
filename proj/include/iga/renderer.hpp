#pragma once

#include "iga/gateway.hpp"
#include "iga/graph.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace iga {

/// Turns a graph into an image; nullopt when rendering is unavailable or failed.
using GraphRenderer = std::function<std::optional<ImageAttachment>(const LogicalGraph&)>;

/// Pipes to_dot() output through a Graphviz-compatible executable
/// (`<exe> -Tpng`) and returns its stdout as a PNG attachment.
GraphRenderer make_dot_renderer(std::filesystem::path executable);

}  // namespace iga
