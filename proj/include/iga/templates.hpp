#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace iga {

/// Named prompt templates with `{placeholder}` slots. The set id is
/// recorded in run state so a run can be reproduced with the same prompts.
///
/// Templates: naive_answer, self_eval, graph_init, graph_init_strict,
/// graph_refine, graph_refine_strict, graph_answer, propose_direct,
/// propose_hinted, propose_guided, check_alignment.
class TemplateSet {
public:
    using Values = std::map<std::string, std::string, std::less<>>;

    /// Built-in set "v1".
    static TemplateSet builtin();
    /// Reads `<dir>/<name>.txt` for every template; id is the directory name.
    static TemplateSet load_dir(const std::filesystem::path& dir);
    /// "v1" or a directory path.
    static TemplateSet resolve(const std::string& spec, const std::filesystem::path& base_dir);

    const std::string& id() const noexcept { return id_; }
    const std::string& raw(std::string_view name) const;

    /// Throws ConfigError for an unknown template or an unfilled placeholder.
    std::string render(std::string_view name, const Values& values) const;

    /// Writes the set out as `<dir>/<name>.txt` files.
    void write_dir(const std::filesystem::path& dir) const;

private:
    TemplateSet(std::string id, std::map<std::string, std::string, std::less<>> templates);
    void validate() const;

    std::string id_;
    std::map<std::string, std::string, std::less<>> templates_;
};

}  // namespace iga
