#ifndef SCOPECOMPLETE_TEXT_H_
#define SCOPECOMPLETE_TEXT_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by every module. Text is UTF-8; columns are
// counted in code points. Invalid bytes count as one code point each so that
// arbitrary byte strings never fail.
namespace scopecomplete::text {

// Number of bytes in the UTF-8 sequence starting at `s[i]` (1 for invalid
// or truncated sequences).
std::size_t sequence_length(std::string_view s, std::size_t i);

std::size_t code_point_count(std::string_view s);

// Byte offset of code point `column` in `s`, clamped to s.size().
std::size_t byte_offset_of_column(std::string_view s, std::size_t column);

// Last `n` code points of `s` (all of it if shorter).
std::string_view tail_code_points(std::string_view s, std::size_t n);
// First `n` code points of `s`.
std::string_view head_code_points(std::string_view s, std::size_t n);

// Splits on '\n'. "a\nb\n" yields {"a", "b", ""}; the empty string yields {""}.
std::vector<std::string_view> split_lines(std::string_view s);

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
}

bool is_blank(std::string_view line);

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);

// Leading-whitespace width; a tab counts `tab_width` columns.
int indent_width(std::string_view line, int tab_width = 1);

// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t v);

}  // namespace scopecomplete::text

#endif  // SCOPECOMPLETE_TEXT_H_
