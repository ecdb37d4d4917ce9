#include "autoform/toml_lite.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace autoform {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& msg)
{
    throw std::runtime_error("toml: line " + std::to_string(line_no) + ": " +
                             msg);
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s)
{
    bool in_basic = false;
    bool in_literal = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_basic) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_basic = false;
            }
        } else if (in_literal) {
            if (c == '\'') {
                in_literal = false;
            }
        } else if (c == '"') {
            in_basic = true;
        } else if (c == '\'') {
            in_literal = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    return s;
}

std::string parse_basic_string(std::string_view s, std::size_t line_no,
                               std::size_t& pos)
{
    std::string out;
    ++pos; // opening quote
    while (pos < s.size()) {
        const char c = s[pos];
        if (c == '"') {
            ++pos;
            return out;
        }
        if (c == '\\') {
            ++pos;
            if (pos >= s.size()) {
                fail(line_no, "dangling escape");
            }
            switch (s[pos]) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'u': {
                    if (pos + 4 >= s.size()) {
                        fail(line_no, "truncated \\u escape");
                    }
                    const std::string hex(s.substr(pos + 1, 4));
                    const char32_t cp = char32_t(std::strtoul(hex.c_str(),
                                                              nullptr, 16));
                    if (cp < 0x80) {
                        out.push_back(char(cp));
                    } else if (cp < 0x800) {
                        out.push_back(char(0xC0 | (cp >> 6)));
                        out.push_back(char(0x80 | (cp & 0x3F)));
                    } else {
                        out.push_back(char(0xE0 | (cp >> 12)));
                        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
                        out.push_back(char(0x80 | (cp & 0x3F)));
                    }
                    pos += 4;
                    break;
                }
                default:
                    fail(line_no, std::string("unsupported escape \\") +
                                      s[pos]);
            }
            ++pos;
            continue;
        }
        out.push_back(c);
        ++pos;
    }
    fail(line_no, "unterminated string");
}

json parse_value(std::string_view s, std::size_t line_no, std::size_t& pos);

json parse_array(std::string_view s, std::size_t line_no, std::size_t& pos)
{
    json arr = json::array();
    ++pos; // '['
    while (pos < s.size()) {
        while (pos < s.size() &&
               std::isspace(static_cast<unsigned char>(s[pos]))) {
            ++pos;
        }
        if (pos < s.size() && s[pos] == ']') {
            ++pos;
            return arr;
        }
        arr.push_back(parse_value(s, line_no, pos));
        while (pos < s.size() &&
               std::isspace(static_cast<unsigned char>(s[pos]))) {
            ++pos;
        }
        if (pos < s.size() && s[pos] == ',') {
            ++pos;
        }
    }
    fail(line_no, "unterminated array");
}

json parse_value(std::string_view s, std::size_t line_no, std::size_t& pos)
{
    if (pos >= s.size()) {
        fail(line_no, "missing value");
    }
    const char c = s[pos];
    if (c == '"') {
        return parse_basic_string(s, line_no, pos);
    }
    if (c == '\'') {
        const auto end = s.find('\'', pos + 1);
        if (end == std::string_view::npos) {
            fail(line_no, "unterminated literal string");
        }
        std::string out(s.substr(pos + 1, end - pos - 1));
        pos = end + 1;
        return out;
    }
    if (c == '[') {
        return parse_array(s, line_no, pos);
    }
    if (c == '{') {
        fail(line_no, "inline tables are not supported");
    }

    std::size_t end = pos;
    while (end < s.size() && s[end] != ',' && s[end] != ']' && s[end] != '#') {
        ++end;
    }
    const std::string token{trim(s.substr(pos, end - pos))};
    pos = end;
    if (token == "true") {
        return true;
    }
    if (token == "false") {
        return false;
    }
    if (token.empty()) {
        fail(line_no, "missing value");
    }
    if (token.find_first_of(".eE") != std::string::npos &&
        token.find("0x") != 0) {
        char* endp = nullptr;
        const double d = std::strtod(token.c_str(), &endp);
        if (endp == token.c_str() || *endp != '\0') {
            fail(line_no, "bad number: " + token);
        }
        return d;
    }
    char* endp = nullptr;
    const long long v = std::strtoll(token.c_str(), &endp, 0);
    if (endp == token.c_str() || *endp != '\0') {
        fail(line_no, "bad value: " + token);
    }
    return v;
}

std::string parse_key(std::string_view s, std::size_t line_no)
{
    s = trim(s);
    if (s.empty()) {
        fail(line_no, "empty key");
    }
    if (s.front() == '"' || s.front() == '\'') {
        std::size_t pos = 0;
        return parse_basic_string(s, line_no, pos);
    }
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' &&
            c != '-') {
            fail(line_no, "unsupported key: " + std::string(s));
        }
    }
    return std::string(s);
}

} // namespace

json parse_toml(std::string_view text)
{
    json root = json::object();
    json* current = &root;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string_view line = trim(strip_comment(raw));
        if (line.empty()) {
            continue;
        }

        if (line.front() == '[') {
            const bool array_table = line.size() > 1 && line[1] == '[';
            const std::size_t open = array_table ? 2 : 1;
            const std::size_t close = line.find(array_table ? "]]" : "]", open);
            if (close == std::string_view::npos) {
                fail(line_no, "unterminated table header");
            }
            const std::string name =
                parse_key(line.substr(open, close - open), line_no);
            if (array_table) {
                if (!root.contains(name)) {
                    root[name] = json::array();
                }
                root[name].push_back(json::object());
                current = &root[name].back();
            } else {
                if (root.contains(name)) {
                    fail(line_no, "duplicate table: " + name);
                }
                root[name] = json::object();
                current = &root[name];
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(line_no, "expected key = value");
        }
        const std::string key = parse_key(line.substr(0, eq), line_no);
        if (key.find('.') != std::string::npos) {
            fail(line_no, "dotted keys are not supported");
        }
        std::string_view rest = trim(line.substr(eq + 1));
        std::size_t pos = 0;
        json value = parse_value(rest, line_no, pos);
        if (!trim(rest.substr(pos)).empty()) {
            fail(line_no, "trailing content after value");
        }
        if (current->contains(key)) {
            fail(line_no, "duplicate key: " + key);
        }
        (*current)[key] = std::move(value);
    }
    return root;
}

json load_toml(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in.is_open()) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_toml(buf.str());
}

} // namespace autoform
