#ifndef SCOPECOMPLETE_POSTPROCESS_H_
#define SCOPECOMPLETE_POSTPROCESS_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "scopecomplete/document.h"
#include "scopecomplete/generation_params.h"
#include "scopecomplete/scope.h"
#include "scopecomplete/trigger.h"

namespace scopecomplete {

enum class CutReason { kNone, kScopeClosed, kOverlapWithExisting, kStopCondition };

std::string_view to_string(CutReason reason);

struct PostprocessConfig {
  bool realign = true;
  // Indentation step for a scope that has no body lines yet, used when the
  // document itself shows none.
  int indent_unit = 4;
  // How many lines below the cursor are compared for regenerated code.
  int overlap_window_lines = 20;
};

// Everything the incremental cutter needs to know about the cursor's scope.
struct ScopeCutContext {
  LanguageFamily family = LanguageFamily::kIndentScoped;
  SuggestionKind kind = SuggestionKind::kSingleLine;
  // The target scope is the module: no dedent or closer bounds it.
  bool module_scope = true;
  // Indentation family: header indent of the target scope.
  int header_indent = -1;
  // Brace family: the target's closing brace already exists in the document,
  // so a generated closer at the scope's level duplicates it.
  bool closer_exists = false;
  // ... and it sits on the cursor line, right of the cursor.
  bool closer_on_cursor_line = false;
  // Indentation family: the target's header is the cursor line, so code
  // appended to that line would turn the header into a plain statement.
  bool header_on_cursor_line = false;
  int tab_width = 1;

  static ScopeCutContext from(const Document& doc, Cursor cursor,
                              const ScopeTree& tree, SuggestionKind kind,
                              const TriggerConfig& trigger = {});
};

struct CutPoint {
  // Byte offset into the raw output; the retained text is raw[0, offset).
  std::size_t offset = 0;
  CutReason reason = CutReason::kNone;

  friend bool operator==(const CutPoint&, const CutPoint&) = default;
};

// Incremental version of the scope cut. Feeding any chunking of a text
// yields the same cut as truncate_to_scope on the whole text. Single owner;
// not shared across threads.
class ScopeCutMonitor {
 public:
  explicit ScopeCutMonitor(const ScopeCutContext& context);

  // nullopt means "continue". Throws std::logic_error once a cut was reported.
  std::optional<CutPoint> feed(std::string_view chunk);

  bool has_cut() const { return cut_.has_value(); }
  const std::optional<CutPoint>& cut() const { return cut_; }
  std::size_t consumed() const { return offset_; }

 private:
  std::optional<CutPoint> step(char c);
  std::optional<CutPoint> step_indent(char c);
  std::optional<CutPoint> step_brace(char c);

  ScopeCutContext ctx_;
  std::optional<CutPoint> cut_;
  std::size_t offset_ = 0;
  // End of the last non-whitespace character seen.
  std::size_t content_end_ = 0;
  bool first_line_ = true;
  bool first_line_comment_ = false;
  bool at_line_start_ = false;
  int line_indent_ = 0;

  enum class Lex { kCode, kLineComment, kBlockComment, kString };
  Lex lex_ = Lex::kCode;
  char quote_ = 0;
  bool escape_ = false;
  bool saw_slash_ = false;
  bool saw_star_ = false;
  int depth_ = 0;
};

struct TruncatedSuggestion {
  std::string text;
  // Code-point offset into the raw output where the scope/stop cut happened;
  // absent if the raw output never left the scope.
  std::optional<std::size_t> cut_offset;
  CutReason cut_reason = CutReason::kNone;
  SuggestionKind kind = SuggestionKind::kSingleLine;
  // Trailing lines dropped because they repeat the code below the cursor.
  int overlap_lines_removed = 0;
};

TruncatedSuggestion truncate_to_scope(std::string_view raw,
                                      const ScopeTree& tree,
                                      const Document& doc, Cursor cursor,
                                      SuggestionKind kind,
                                      const PostprocessConfig& config = {},
                                      const TriggerConfig& trigger = {});

// Finishes a raw prefix whose cut was already found (by a monitor or by
// truncate_to_scope): per-line trimming, overlap removal, re-indentation.
TruncatedSuggestion finalize_suggestion(std::string_view raw,
                                        std::optional<CutPoint> cut,
                                        const ScopeTree& tree,
                                        const Document& doc, Cursor cursor,
                                        SuggestionKind kind,
                                        const PostprocessConfig& config = {},
                                        const TriggerConfig& trigger = {});

// Shifts every line after the first by one constant so that the smallest
// indentation among them equals `expected_indent`. Only leading whitespace
// changes. With `skip_closer_lines`, lines starting with '}' and label lines
// do not take part in the minimum. `first_line_indent` is the effective indentation of the
// first line when it is known; if it already equals `expected_indent` the
// text is in the document's frame and is returned unchanged.
std::string realign_indentation(std::string_view raw, int expected_indent,
                                int tab_width = 1,
                                bool skip_closer_lines = false,
                                std::optional<int> first_line_indent = std::nullopt);

// Same, with the expected indentation taken from the cursor's scope.
std::string realign_indentation(std::string_view raw, Cursor cursor,
                                const Document& doc,
                                const PostprocessConfig& config = {});

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_POSTPROCESS_H_
