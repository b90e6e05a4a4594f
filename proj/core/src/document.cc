#include "scopecomplete/document.h"

#include <algorithm>
#include <array>
#include <utility>

#include "scopecomplete/text.h"

namespace scopecomplete {

std::string_view to_string(LanguageFamily family) {
  switch (family) {
    case LanguageFamily::kIndentScoped:
      return "indent";
    case LanguageFamily::kBraceScoped:
      return "brace";
  }
  return "unknown";
}

std::optional<LanguageFamily> family_for_language(std::string_view id) {
  static constexpr std::array<std::string_view, 4> kIndent = {
      "indent", "python", "starlark", "nim"};
  static constexpr std::array<std::string_view, 17> kBrace = {
      "brace",      "c",     "cpp",  "java",  "javascript", "typescript",
      "rust",       "go",    "csharp", "kotlin", "swift",    "php",
      "hack",       "scala", "dart", "objective-c", "javascriptreact"};
  if (std::find(kIndent.begin(), kIndent.end(), id) != kIndent.end()) {
    return LanguageFamily::kIndentScoped;
  }
  if (std::find(kBrace.begin(), kBrace.end(), id) != kBrace.end()) {
    return LanguageFamily::kBraceScoped;
  }
  return std::nullopt;
}

Document::Document(std::string text, LanguageFamily family,
                   std::int64_t version)
    : text_(std::move(text)), family_(family), version_(version) {
  line_starts_.push_back(0);
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (text_[i] == '\n') line_starts_.push_back(i + 1);
  }
}

std::string_view Document::line(int index) const {
  if (index < 0 || index >= line_count()) {
    throw InvalidPositionError("line index out of range");
  }
  const std::size_t start = line_starts_[index];
  const std::size_t end = index + 1 < line_count()
                              ? line_starts_[index + 1] - 1
                              : text_.size();
  return std::string_view(text_).substr(start, end - start);
}

int Document::line_length(int index) const {
  return static_cast<int>(text::code_point_count(line(index)));
}

bool Document::is_valid(Cursor cursor) const {
  return cursor.line >= 0 && cursor.line < line_count() &&
         cursor.column >= 0 && cursor.column <= line_length(cursor.line);
}

std::size_t Document::offset_of(Position pos) const {
  if (!is_valid(pos)) throw InvalidPositionError("position outside document");
  return line_starts_[pos.line] +
         text::byte_offset_of_column(line(pos.line), pos.column);
}

Position Document::position_of(std::size_t byte_offset) const {
  byte_offset = std::min(byte_offset, text_.size());
  const auto it =
      std::upper_bound(line_starts_.begin(), line_starts_.end(), byte_offset);
  const int line_index = static_cast<int>(it - line_starts_.begin()) - 1;
  const std::string_view prefix = std::string_view(text_).substr(
      line_starts_[line_index], byte_offset - line_starts_[line_index]);
  return {line_index, static_cast<int>(text::code_point_count(prefix))};
}

Position Document::end_position() const {
  return {line_count() - 1, line_length(line_count() - 1)};
}

Document Document::apply(const TextEdit& edit, std::int64_t new_version) const {
  if (new_version <= version_) {
    throw std::invalid_argument("document version must increase");
  }
  if (edit.full) return Document(edit.text, family_, new_version);
  if (edit.end < edit.start) throw InvalidPositionError("edit range reversed");
  const std::size_t begin = offset_of(edit.start);
  const std::size_t end = offset_of(edit.end);
  std::string next;
  next.reserve(text_.size() - (end - begin) + edit.text.size());
  next.append(text_, 0, begin);
  next.append(edit.text);
  next.append(text_, end, std::string::npos);
  return Document(std::move(next), family_, new_version);
}

Position end_of_insertion(Position at, std::string_view inserted) {
  const std::size_t last_nl = inserted.rfind('\n');
  if (last_nl == std::string_view::npos) {
    return {at.line,
            at.column + static_cast<int>(text::code_point_count(inserted))};
  }
  const int newlines =
      static_cast<int>(std::count(inserted.begin(), inserted.end(), '\n'));
  return {at.line + newlines, static_cast<int>(text::code_point_count(
                                  inserted.substr(last_nl + 1)))};
}

}  // namespace scopecomplete
