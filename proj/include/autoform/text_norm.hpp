#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace autoform {

// UTF-8 decode; malformed sequences map to U+FFFD so the result is
// always valid Unicode.
std::vector<char32_t> decode_utf8(std::string_view text);

void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

// Whitespace in the sense of the whitespace-collapse rule: ASCII space
// and control whitespace plus the common Unicode space characters.
bool is_space_cp(char32_t cp);

// Canonical composition over a compact table: Latin-1 and the common
// Latin Extended-A letters, plus Greek vowels with acute/tonos. Base +
// combining-mark sequences outside the table pass through unchanged.
std::vector<char32_t> compose_canonical(std::vector<char32_t> cps);

// Canonical text form used for record identity: compose, trim, and
// collapse internal whitespace runs to a single U+0020. Idempotent.
std::string normalize_text(std::string_view text);

// Share of code points above U+007F, in [0,1]; 0 for empty text.
double non_ascii_fraction(std::string_view text);

} // namespace autoform
