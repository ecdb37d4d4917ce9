#include "autoform/text_norm.hpp"

#include <algorithm>
#include <array>

namespace autoform {

namespace {

struct Composition {
    char32_t base;
    char32_t mark;
    char32_t composed;
};

// Sorted by (mark, base). Covers the precomposed Latin-1 letters, the
// Latin Extended-A letters common in transliterated names, and Greek
// vowels with acute (tonos).
constexpr std::array<Composition, 79> kCompositions = {{
    // U+0300 combining grave
    {U'A', 0x0300, 0x00C0}, {U'E', 0x0300, 0x00C8}, {U'I', 0x0300, 0x00CC},
    {U'O', 0x0300, 0x00D2}, {U'U', 0x0300, 0x00D9},
    {U'a', 0x0300, 0x00E0}, {U'e', 0x0300, 0x00E8}, {U'i', 0x0300, 0x00EC},
    {U'o', 0x0300, 0x00F2}, {U'u', 0x0300, 0x00F9},
    // U+0301 combining acute
    {U'A', 0x0301, 0x00C1}, {U'C', 0x0301, 0x0106}, {U'E', 0x0301, 0x00C9},
    {U'I', 0x0301, 0x00CD}, {U'N', 0x0301, 0x0143}, {U'O', 0x0301, 0x00D3},
    {U'S', 0x0301, 0x015A}, {U'U', 0x0301, 0x00DA}, {U'Y', 0x0301, 0x00DD},
    {U'Z', 0x0301, 0x0179},
    {U'a', 0x0301, 0x00E1}, {U'c', 0x0301, 0x0107}, {U'e', 0x0301, 0x00E9},
    {U'i', 0x0301, 0x00ED}, {U'n', 0x0301, 0x0144}, {U'o', 0x0301, 0x00F3},
    {U's', 0x0301, 0x015B}, {U'u', 0x0301, 0x00FA}, {U'y', 0x0301, 0x00FD},
    {U'z', 0x0301, 0x017A},
    {0x0391, 0x0301, 0x0386}, {0x0395, 0x0301, 0x0388}, {0x0397, 0x0301, 0x0389},
    {0x0399, 0x0301, 0x038A}, {0x039F, 0x0301, 0x038C}, {0x03A5, 0x0301, 0x038E},
    {0x03A9, 0x0301, 0x038F},
    {0x03B1, 0x0301, 0x03AC}, {0x03B5, 0x0301, 0x03AD}, {0x03B7, 0x0301, 0x03AE},
    {0x03B9, 0x0301, 0x03AF}, {0x03BF, 0x0301, 0x03CC}, {0x03C5, 0x0301, 0x03CD},
    {0x03C9, 0x0301, 0x03CE},
    // U+0302 combining circumflex
    {U'A', 0x0302, 0x00C2}, {U'E', 0x0302, 0x00CA}, {U'I', 0x0302, 0x00CE},
    {U'O', 0x0302, 0x00D4}, {U'U', 0x0302, 0x00DB},
    {U'a', 0x0302, 0x00E2}, {U'e', 0x0302, 0x00EA}, {U'i', 0x0302, 0x00EE},
    {U'o', 0x0302, 0x00F4}, {U'u', 0x0302, 0x00FB},
    // U+0303 combining tilde
    {U'A', 0x0303, 0x00C3}, {U'N', 0x0303, 0x00D1}, {U'O', 0x0303, 0x00D5},
    {U'a', 0x0303, 0x00E3}, {U'n', 0x0303, 0x00F1}, {U'o', 0x0303, 0x00F5},
    // U+0308 combining diaeresis
    {U'A', 0x0308, 0x00C4}, {U'E', 0x0308, 0x00CB}, {U'I', 0x0308, 0x00CF},
    {U'O', 0x0308, 0x00D6}, {U'U', 0x0308, 0x00DC},
    {U'a', 0x0308, 0x00E4}, {U'e', 0x0308, 0x00EB}, {U'i', 0x0308, 0x00EF},
    {U'o', 0x0308, 0x00F6}, {U'u', 0x0308, 0x00FC}, {U'y', 0x0308, 0x00FF},
    // U+030A combining ring above
    {U'A', 0x030A, 0x00C5}, {U'a', 0x030A, 0x00E5},
    // U+030C combining caron
    {U'C', 0x030C, 0x010C}, {U'S', 0x030C, 0x0160}, {U'Z', 0x030C, 0x017D},
    {U'c', 0x030C, 0x010D}, {U's', 0x030C, 0x0161}, {U'z', 0x030C, 0x017E},
}};

constexpr char32_t kReplacement = 0xFFFD;

bool lookup_composition(char32_t base, char32_t mark, char32_t& out)
{
    for (const auto& c : kCompositions) {
        if (c.base == base && c.mark == mark) {
            out = c.composed;
            return true;
        }
    }
    return false;
}

// Cedilla handled separately: NFC order puts U+0327 before above-marks,
// but in practice it occurs alone on C.
bool lookup_cedilla(char32_t base, char32_t& out)
{
    if (base == U'C') { out = 0x00C7; return true; }
    if (base == U'c') { out = 0x00E7; return true; }
    return false;
}

} // namespace

std::vector<char32_t> decode_utf8(std::string_view text)
{
    std::vector<char32_t> cps;
    cps.reserve(text.size());

    std::size_t i = 0;
    const auto n = text.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        if (b0 < 0x80) {
            cps.push_back(b0);
            ++i;
            continue;
        }

        int len = 0;
        char32_t cp = 0;
        if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
        else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
        else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
        else { cps.push_back(kReplacement); ++i; continue; }

        if (i + len > n) { cps.push_back(kReplacement); ++i; continue; }

        bool ok = true;
        for (int k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) { ok = false; break; }
            cp = (cp << 6) | (b & 0x3F);
        }
        // Reject overlong forms and surrogates.
        if (ok) {
            if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
                (cp >= 0xD800 && cp <= 0xDFFF)) {
                ok = false;
            }
        }
        if (!ok) { cps.push_back(kReplacement); ++i; continue; }
        cps.push_back(cp);
        i += len;
    }
    return cps;
}

void append_utf8(std::string& out, char32_t cp)
{
    if (cp < 0x80) {
        out.push_back(char(cp));
    } else if (cp < 0x800) {
        out.push_back(char(0xC0 | (cp >> 6)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(char(0xE0 | (cp >> 12)));
        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(char(0xF0 | (cp >> 18)));
        out.push_back(char(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(char(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(char(0x80 | (cp & 0x3F)));
    }
}

std::string encode_utf8(const std::vector<char32_t>& cps)
{
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        append_utf8(out, cp);
    }
    return out;
}

bool is_space_cp(char32_t cp)
{
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
        case 0x20: case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

std::vector<char32_t> compose_canonical(std::vector<char32_t> cps)
{
    std::vector<char32_t> out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        if (!out.empty()) {
            char32_t composed = 0;
            if (cp == 0x0327 && lookup_cedilla(out.back(), composed)) {
                out.back() = composed;
                continue;
            }
            if (lookup_composition(out.back(), cp, composed)) {
                out.back() = composed;
                continue;
            }
        }
        out.push_back(cp);
    }
    return out;
}

std::string normalize_text(std::string_view text)
{
    const auto cps = compose_canonical(decode_utf8(text));

    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    bool seen_content = false;
    for (char32_t cp : cps) {
        if (is_space_cp(cp)) {
            pending_space = seen_content;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        append_utf8(out, cp);
        seen_content = true;
    }
    return out;
}

double non_ascii_fraction(std::string_view text)
{
    const auto cps = decode_utf8(text);
    if (cps.empty()) {
        return 0.0;
    }
    const auto non_ascii = std::count_if(
        cps.begin(), cps.end(), [](char32_t cp) { return cp > 0x7F; });
    return double(non_ascii) / double(cps.size());
}

} // namespace autoform
