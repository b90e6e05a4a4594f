#ifndef SCOPECOMPLETE_SCOPE_H_
#define SCOPECOMPLETE_SCOPE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scopecomplete/document.h"

namespace scopecomplete {

enum class ScopeKind {
  kModule,
  kFunction,
  kClass,
  kConditional,
  kLoop,
  kBlock,
  kNotebookCell,
  kOther,
};

std::string_view to_string(ScopeKind kind);

// Characters that may trail the cursor without counting as code to the right
// of it. Whitespace is always permitted.
class CloserSet {
 public:
  CloserSet() : chars_("})]") {}
  // Throws std::invalid_argument if `chars` is empty or has alphanumerics.
  explicit CloserSet(std::string chars);

  bool contains(char c) const { return chars_.find(c) != std::string::npos; }
  const std::string& chars() const { return chars_; }

  // True if `s` consists solely of closers and whitespace (including empty).
  bool only_closers(std::string_view s) const;

 private:
  std::string chars_;
};

struct ScopeConfig {
  // Width of a tab in indentation columns.
  int tab_width = 1;
  // Header keywords for the indentation family and the scope they open.
  std::map<std::string, ScopeKind, std::less<>> indent_headers = {
      {"def", ScopeKind::kFunction},     {"class", ScopeKind::kClass},
      {"if", ScopeKind::kConditional},   {"elif", ScopeKind::kConditional},
      {"else", ScopeKind::kConditional}, {"for", ScopeKind::kLoop},
      {"while", ScopeKind::kLoop},       {"try", ScopeKind::kBlock},
      {"except", ScopeKind::kBlock},     {"finally", ScopeKind::kBlock},
      {"with", ScopeKind::kBlock},
  };
};

struct ScopeNode {
  ScopeKind kind = ScopeKind::kModule;
  int header_line = 0;
  // [body_start, body_end). For the indentation family the body runs from the
  // line after the header to the start of the line that dedents out of it.
  // For the brace family it runs from just after `{` to just after the
  // matching `}`, so the closing brace belongs to the scope.
  Position body_start;
  Position body_end;
  int indent = 0;
  // Brace family: position of the closing brace when present in the text.
  std::optional<Position> closer;
  std::vector<ScopeNode> children;

  bool contains(Position p) const { return body_start <= p && p < body_end; }
  bool is_module() const { return kind == ScopeKind::kModule; }
};

struct ScopeTree {
  ScopeNode root;
  std::int64_t doc_version = 0;
  LanguageFamily family = LanguageFamily::kIndentScoped;
  int tab_width = 1;
  // Per physical line: whitespace-only line outside any string/continuation.
  std::vector<bool> blank_lines;
};

class StaleTreeError : public std::runtime_error {
 public:
  StaleTreeError()
      : std::runtime_error("scope tree is stale; re-parse the document") {}
};

struct LineContext {
  std::string text_before_cursor;
  std::string text_after_cursor;
  bool after_is_closers_only = true;
  bool defines_new_scope = false;
};

// Single linear scan; never fails. Unclosed scopes extend to the end of the
// document, unrecognizable input yields a flat Module.
ScopeTree parse_document(const Document& doc, const ScopeConfig& config = {});

// Deepest scope containing the cursor. On a blank line of the indentation
// family, a scope owns the cursor only if its header indent is smaller than
// the cursor column.
const ScopeNode& innermost_scope(const ScopeTree& tree, const Document& doc,
                                 Cursor cursor);

// Module -> ... -> innermost.
std::vector<const ScopeNode*> scope_chain(const ScopeTree& tree,
                                          const Document& doc, Cursor cursor);

// True iff the innermost scope has no content after the cursor. Closers on
// the cursor line and the scope's own closing brace are not content.
bool is_at_end_of_scope(const ScopeTree& tree, const Document& doc,
                        Cursor cursor, const CloserSet& closers = {});

LineContext line_context(const Document& doc, Cursor cursor,
                         const CloserSet& closers = {},
                         const ScopeConfig& config = {});

// Scope whose header sits on `line` (indentation family), or whose opening
// brace ends `line` (brace family). Deepest match wins.
const ScopeNode* scope_opened_on_line(const ScopeTree& tree, int line);

// Classifies the text preceding an opening brace, e.g. "if (x)" or
// "int main()". An empty header is an anonymous Block.
ScopeKind classify_brace_header(std::string_view header);

// Header keyword kind for an indentation-family line, if the line (comments
// stripped) starts with a header keyword and ends with ':'.
std::optional<ScopeKind> classify_indent_header(std::string_view line,
                                                const ScopeConfig& config);

// `public:`, `case 3:`, `default:` (trimmed line). Brace-family labels sit
// outside their body's indentation.
bool is_label_line(std::string_view trimmed);

// Most common indentation step between consecutive code lines of the
// document; nullopt when no line is indented deeper than the previous one.
std::optional<int> indent_unit_of(const ScopeTree& tree, const Document& doc);

// Indentation of the first body line of `scope`, else the header's plus the
// document's indentation step; nullopt when the document shows neither.
std::optional<int> documented_body_indent(const ScopeTree& tree, const Document& doc,
                                          const ScopeNode& scope);

// Same, falling back to the header's indentation plus `indent_unit`.
int expected_body_indent(const ScopeTree& tree, const Document& doc,
                         const ScopeNode& scope, int indent_unit = 4);

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_SCOPE_H_
