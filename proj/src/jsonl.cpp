#include "autoform/jsonl.hpp"

#include <stdexcept>
#include <string>

namespace autoform {

JsonlStats for_each_jsonl(
    const std::filesystem::path& path,
    const std::function<void(std::size_t, json&&)>& fn,
    const std::function<void(std::size_t, const std::string&)>& on_malformed)
{
    std::ifstream in(path);
    if (!in.is_open()) {
        throw std::runtime_error("cannot open " + path.string());
    }

    JsonlStats stats;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        ++stats.lines;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            ++stats.malformed;
            if (on_malformed) {
                on_malformed(line_no, line);
            }
            continue;
        }
        ++stats.parsed;
        fn(line_no, std::move(j));
    }
    return stats;
}

std::vector<json> read_jsonl(const std::filesystem::path& path)
{
    std::vector<json> out;
    for_each_jsonl(path, [&out](std::size_t, json&& j) {
        out.push_back(std::move(j));
    });
    return out;
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path, bool append)
    : out_(path, append ? std::ios::app : std::ios::trunc)
{
    if (!out_.is_open()) {
        throw std::runtime_error("cannot open " + path.string() +
                                 " for writing");
    }
}

void JsonlWriter::write(const json& j)
{
    out_ << dump_line(j) << '\n';
    out_.flush();
    ++written_;
}

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<json>& values)
{
    JsonlWriter w(path);
    for (const auto& j : values) {
        w.write(j);
    }
}

} // namespace autoform
