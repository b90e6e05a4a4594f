#ifndef SCOPECOMPLETE_TRIGGER_H_
#define SCOPECOMPLETE_TRIGGER_H_

#include <optional>
#include <stdexcept>
#include <string_view>

#include "scopecomplete/document.h"
#include "scopecomplete/generation_params.h"
#include "scopecomplete/scope.h"

namespace scopecomplete {

enum class TriggerKind { kSuppress, kSingleLine, kMultiLine };

enum class MultiLineReason {
  kEndOfInnerScope,
  kNewScopeDefinition,
  kNotebookCellEnd,
  kExplicitRequest,
};

std::string_view to_string(TriggerKind kind);
std::string_view to_string(MultiLineReason reason);

class TriggerDecision {
 public:
  static TriggerDecision suppress() { return TriggerDecision(TriggerKind::kSuppress, {}); }
  static TriggerDecision single_line() { return TriggerDecision(TriggerKind::kSingleLine, {}); }
  static TriggerDecision multi_line(MultiLineReason reason) {
    return TriggerDecision(TriggerKind::kMultiLine, reason);
  }

  TriggerKind kind() const { return kind_; }
  // Present iff kind() == kMultiLine.
  std::optional<MultiLineReason> reason() const { return reason_; }
  SuggestionKind suggestion_kind() const {
    return kind_ == TriggerKind::kMultiLine ? SuggestionKind::kMultiLine
                                            : SuggestionKind::kSingleLine;
  }

  friend bool operator==(const TriggerDecision&, const TriggerDecision&) = default;

 private:
  TriggerDecision(TriggerKind kind, std::optional<MultiLineReason> reason)
      : kind_(kind), reason_(reason) {}

  TriggerKind kind_;
  std::optional<MultiLineReason> reason_;
};

struct NotebookCellInfo {
  // The cursor sits at the end of its cell.
  bool cursor_at_cell_end = false;
};

struct RequestOrigin {
  bool explicit_shortcut = false;
  std::optional<NotebookCellInfo> notebook_cell;
};

struct TriggerConfig {
  CloserSet closers;
  ScopeConfig scope;
  // Off: every multi-line decision is downgraded to single-line.
  bool multi_line_enabled = true;
  // Allow EndOfInnerScope when the innermost scope is the module.
  bool allow_module_scope = false;
  int single_line_max_tokens = 25;
  int multi_line_max_tokens = 120;
};

// Rule cascade, first match wins:
//   1. code right of the cursor that is not a closer -> Suppress
//   2. explicit shortcut                             -> MultiLine(Explicit)
//   3. cursor at the end of a notebook cell          -> MultiLine(CellEnd)
//   4. cursor ends a header opening an empty scope   -> MultiLine(NewScope)
//   5. at end of a non-module innermost scope        -> MultiLine(EndOfScope)
//   6. otherwise                                     -> SingleLine
TriggerDecision decide_trigger(const Document& doc, Cursor cursor,
                               const RequestOrigin& origin,
                               const ScopeTree& tree,
                               const TriggerConfig& config = {});

// Throws std::logic_error for a Suppress decision.
GenerationParams generation_params_for(const TriggerDecision& decision,
                                       const TriggerConfig& config = {});

// Scope a multi-line suggestion must stay inside: the scope opened on the
// cursor line for header triggers, the innermost scope otherwise.
const ScopeNode& target_scope(const Document& doc, Cursor cursor,
                              const ScopeTree& tree,
                              const TriggerConfig& config = {});

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_TRIGGER_H_
