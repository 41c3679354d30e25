#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Small UTF-8 helpers shared by the tokenizer, the offline embedder and the
// label parser. Character classes come from the C.UTF-8 locale when present
// and fall back to ASCII rules otherwise.
namespace factgpt::text {

// Invalid sequences decode to U+FFFD, one per offending byte.
std::u32string decode_utf8(std::string_view in);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view in);

bool is_word_char(char32_t cp);
bool is_space(char32_t cp);
char32_t to_lower(char32_t cp);

}  // namespace factgpt::text
