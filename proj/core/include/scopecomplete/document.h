#ifndef SCOPECOMPLETE_DOCUMENT_H_
#define SCOPECOMPLETE_DOCUMENT_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scopecomplete {

enum class LanguageFamily { kIndentScoped, kBraceScoped };

std::string_view to_string(LanguageFamily family);
// Maps an editor language id ("python", "cpp", ...) or a family name
// ("indent", "brace") to a family. Unknown ids yield nullopt.
std::optional<LanguageFamily> family_for_language(std::string_view language_id);

// 0-based line and code-point column.
struct Position {
  int line = 0;
  int column = 0;

  friend auto operator<=>(const Position&, const Position&) = default;
};

using Cursor = Position;

// Replaces [start, end) with `text`. A full-document replacement is expressed
// with `full = true`.
struct TextEdit {
  Position start;
  Position end;
  std::string text;
  bool full = false;

  static TextEdit insertion(Position at, std::string text) {
    return TextEdit{at, at, std::move(text), false};
  }
  static TextEdit replace_all(std::string text) {
    return TextEdit{{}, {}, std::move(text), true};
  }
};

class InvalidPositionError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Immutable snapshot of a source file.
class Document {
 public:
  Document() : Document("", LanguageFamily::kIndentScoped, 0) {}
  Document(std::string text, LanguageFamily family, std::int64_t version = 0);

  const std::string& text() const { return text_; }
  LanguageFamily family() const { return family_; }
  std::int64_t version() const { return version_; }

  int line_count() const { return static_cast<int>(line_starts_.size()); }
  std::string_view line(int index) const;
  // Length of a line in code points.
  int line_length(int index) const;

  bool is_valid(Cursor cursor) const;
  // Byte offset of a valid position; throws InvalidPositionError otherwise.
  std::size_t offset_of(Position pos) const;
  Position position_of(std::size_t byte_offset) const;
  // One past the last character.
  Position end_position() const;

  // Returns a new snapshot with `edit` applied. `new_version` must be greater
  // than the current version.
  Document apply(const TextEdit& edit, std::int64_t new_version) const;

 private:
  std::string text_;
  LanguageFamily family_;
  std::int64_t version_;
  std::vector<std::size_t> line_starts_;
};

// Position reached after inserting `inserted` at `at`.
Position end_of_insertion(Position at, std::string_view inserted);

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_DOCUMENT_H_
