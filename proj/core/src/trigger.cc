#include "scopecomplete/trigger.h"

#include "scopecomplete/text.h"

namespace scopecomplete {
namespace {

bool body_has_content(const Document& doc, const ScopeNode& node) {
  const int last = std::min(node.body_end.line, doc.line_count());
  for (int l = node.body_start.line; l < last; ++l) {
    if (!text::is_blank(doc.line(l))) return true;
  }
  return false;
}

// A header on the cursor line opens a scope that has no body yet.
bool opens_new_scope(const Document& doc, Cursor cursor, const ScopeTree& tree,
                     const TriggerConfig& config) {
  if (doc.family() == LanguageFamily::kBraceScoped) {
    return is_at_end_of_scope(tree, doc, cursor, config.closers);
  }
  const ScopeNode* node = scope_opened_on_line(tree, cursor.line);
  if (node == nullptr || node->header_line != cursor.line) return true;
  return !body_has_content(doc, *node);
}

}  // namespace

std::string_view to_string(TriggerKind kind) {
  switch (kind) {
    case TriggerKind::kSuppress:
      return "suppress";
    case TriggerKind::kSingleLine:
      return "single_line";
    case TriggerKind::kMultiLine:
      return "multi_line";
  }
  return "suppress";
}

std::string_view to_string(MultiLineReason reason) {
  switch (reason) {
    case MultiLineReason::kEndOfInnerScope:
      return "end_of_inner_scope";
    case MultiLineReason::kNewScopeDefinition:
      return "new_scope_definition";
    case MultiLineReason::kNotebookCellEnd:
      return "notebook_cell_end";
    case MultiLineReason::kExplicitRequest:
      return "explicit_request";
  }
  return "end_of_inner_scope";
}

TriggerDecision decide_trigger(const Document& doc, Cursor cursor,
                               const RequestOrigin& origin,
                               const ScopeTree& tree,
                               const TriggerConfig& config) {
  if (tree.doc_version != doc.version()) throw StaleTreeError();
  const LineContext ctx =
      line_context(doc, cursor, config.closers, config.scope);
  if (!ctx.after_is_closers_only) return TriggerDecision::suppress();

  auto multi = [&](MultiLineReason reason) {
    return config.multi_line_enabled ? TriggerDecision::multi_line(reason)
                                     : TriggerDecision::single_line();
  };
  if (origin.explicit_shortcut) return multi(MultiLineReason::kExplicitRequest);
  if (origin.notebook_cell && origin.notebook_cell->cursor_at_cell_end) {
    return multi(MultiLineReason::kNotebookCellEnd);
  }
  if (ctx.defines_new_scope && opens_new_scope(doc, cursor, tree, config)) {
    return multi(MultiLineReason::kNewScopeDefinition);
  }
  const ScopeNode& inner = innermost_scope(tree, doc, cursor);
  if ((!inner.is_module() || config.allow_module_scope) &&
      is_at_end_of_scope(tree, doc, cursor, config.closers)) {
    return multi(MultiLineReason::kEndOfInnerScope);
  }
  return TriggerDecision::single_line();
}

GenerationParams generation_params_for(const TriggerDecision& decision,
                                       const TriggerConfig& config) {
  GenerationParams params;
  switch (decision.kind()) {
    case TriggerKind::kSuppress:
      throw std::logic_error("no generation for a suppressed trigger");
    case TriggerKind::kSingleLine:
      params.max_tokens = config.single_line_max_tokens;
      params.stop_at_newline = true;
      break;
    case TriggerKind::kMultiLine:
      params.max_tokens = config.multi_line_max_tokens;
      params.stop_at_newline = false;
      break;
  }
  params.validate();
  return params;
}

const ScopeNode& target_scope(const Document& doc, Cursor cursor,
                              const ScopeTree& tree,
                              const TriggerConfig& config) {
  if (doc.family() == LanguageFamily::kIndentScoped) {
    const LineContext ctx =
        line_context(doc, cursor, config.closers, config.scope);
    if (ctx.defines_new_scope) {
      if (tree.doc_version != doc.version()) throw StaleTreeError();
      const ScopeNode* node = scope_opened_on_line(tree, cursor.line);
      if (node != nullptr && node->header_line == cursor.line) return *node;
    }
  }
  return innermost_scope(tree, doc, cursor);
}

}  // namespace scopecomplete
