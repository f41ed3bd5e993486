#pragma once

// UTF-8 helpers shared by the tokenizer, the matchers and the splitters.
// Case folding covers Latin (Basic, Latin-1, Extended-A/B), Greek and
// Cyrillic; other scripts pass through unchanged.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace expltk::text {

inline constexpr char32_t kInvalidCodepoint = 0xFFFD;

// Decodes the codepoint starting at `pos` and advances `pos` past it.
// Malformed sequences yield U+FFFD and advance by one byte.
char32_t decode_next(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);

// Largest position <= pos that does not fall inside a multi-byte sequence.
std::size_t floor_codepoint(std::string_view s, std::size_t pos);

char32_t fold_char(char32_t cp);
std::string fold_case(std::string_view s);

// Case-folded, whitespace runs collapsed to one ASCII space, trimmed.
std::string normalize(std::string_view s);

// normalize() plus punctuation removed (punctuation is treated as a word
// separator, so "Cervantes." and "Cervantes" compare equal).
std::string normalize_loose(std::string_view s);

std::string_view trim(std::string_view s);

// Whitespace-separated words (Unicode whitespace).
std::vector<std::string_view> words(std::string_view s);

bool is_all_punct(std::string_view s);

}  // namespace expltk::text
