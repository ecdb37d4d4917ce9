#pragma once

#include <filesystem>
#include <string_view>

#include "autoform/types.hpp"

namespace autoform {

// Minimal TOML reader for the toolchain's config files, mapped onto JSON:
// tables become objects, [[name]] becomes an array of objects. Supports
// comments, [section] / [[section]] headers, basic and literal strings,
// integers, floats, booleans and flat arrays. Dotted keys and inline
// tables are rejected. Throws std::runtime_error with a line number on
// malformed input.
json parse_toml(std::string_view text);

json load_toml(const std::filesystem::path& path);

} // namespace autoform
