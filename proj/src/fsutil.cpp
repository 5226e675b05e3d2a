#include "iga/fsutil.hpp"

#include "iga/text.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace iga {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
    std::vector<nlohmann::json> rows;
    const auto lines = text::split_lines(read_file(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) continue;
        auto j = nlohmann::json::parse(lines[i], nullptr, false);
        if (j.is_discarded()) {
            throw std::runtime_error(path.string() + ":" + std::to_string(i + 1) + ": invalid JSON");
        }
        rows.push_back(std::move(j));
    }
    return rows;
}

std::string to_jsonl(const std::vector<nlohmann::json>& rows) {
    std::string out;
    for (const auto& r : rows) {
        out += r.dump();
        out.push_back('\n');
    }
    return out;
}

}  // namespace iga
