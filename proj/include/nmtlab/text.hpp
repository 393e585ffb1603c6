#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nmtlab::text {

// Decodes UTF-8 into Unicode scalar values. Returns nullopt on malformed
// input (overlong forms, surrogates, truncated sequences, values > U+10FFFF).
std::optional<std::u32string> decode_utf8(std::string_view s);

// Same as decode_utf8 but throws DecodeError carrying `line`.
std::u32string decode_utf8_or_throw(std::string_view s, std::size_t line = 0);

std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

// Splits a valid UTF-8 string into one string per scalar value.
std::vector<std::string> utf8_chars(std::string_view s);

bool is_space(char c);
std::string_view trim(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

bool ends_with(std::string_view s, std::string_view suffix);

// Reads a whole file as lines (LF separated, trailing CR removed). Throws Error
// when the file cannot be opened.
std::vector<std::string> read_lines(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

} // namespace nmtlab::text
