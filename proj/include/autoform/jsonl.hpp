#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include "autoform/types.hpp"

namespace autoform {

struct JsonlStats {
    std::size_t lines = 0;
    std::size_t parsed = 0;
    std::size_t malformed = 0;
};

// Calls `fn(line_no, value)` for every parseable line; malformed lines
// are counted and skipped, blank lines ignored. Throws std::runtime_error
// if the file cannot be opened.
JsonlStats for_each_jsonl(
    const std::filesystem::path& path,
    const std::function<void(std::size_t, json&&)>& fn,
    const std::function<void(std::size_t, const std::string&)>& on_malformed =
        {});

std::vector<json> read_jsonl(const std::filesystem::path& path);

// One object per line, LF-terminated, UTF-8.
class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path, bool append = false);

    void write(const json& j);
    std::size_t written() const { return written_; }

private:
    std::ofstream out_;
    std::size_t written_ = 0;
};

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<json>& values);

} // namespace autoform
