#include "scopecomplete/postprocess.h"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "scopecomplete/text.h"

namespace scopecomplete {
namespace {

std::vector<std::string> split_trimmed(std::string_view s) {
  std::vector<std::string> out;
  for (std::string_view line : text::split_lines(s)) {
    out.emplace_back(text::trim_right(line));
  }
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

void drop_trailing_blank(std::vector<std::string>& lines) {
  while (lines.size() > 1 && lines.back().empty()) lines.pop_back();
}

// Removes trailing generated lines that repeat the lines right below the
// cursor, until no such suffix remains.
int remove_overlap(std::vector<std::string>& lines, const Document& doc,
                   Cursor cursor, int window) {
  std::vector<std::string_view> below;
  for (int l = cursor.line + 1;
       l < doc.line_count() && static_cast<int>(below.size()) < window; ++l) {
    below.push_back(text::trim(doc.line(l)));
  }
  int removed = 0;
  for (;;) {
    const std::size_t continuation = lines.size() - 1;
    std::size_t match = 0;
    for (std::size_t k = std::min(continuation, below.size()); k >= 1; --k) {
      bool equal = true;
      bool any_code = false;
      for (std::size_t j = 0; j < k && equal; ++j) {
        const std::string_view generated =
            text::trim(lines[lines.size() - k + j]);
        equal = generated == below[j];
        any_code = any_code || !generated.empty();
      }
      if (equal && any_code) {
        match = k;
        break;
      }
    }
    if (match == 0) break;
    lines.resize(lines.size() - match);
    removed += static_cast<int>(match);
    drop_trailing_blank(lines);
  }
  return removed;
}

}  // namespace

std::string_view to_string(CutReason reason) {
  switch (reason) {
    case CutReason::kNone:
      return "none";
    case CutReason::kScopeClosed:
      return "scope_closed";
    case CutReason::kOverlapWithExisting:
      return "overlap_with_existing";
    case CutReason::kStopCondition:
      return "stop_condition";
  }
  return "none";
}

ScopeCutContext ScopeCutContext::from(const Document& doc, Cursor cursor,
                                      const ScopeTree& tree,
                                      SuggestionKind kind,
                                      const TriggerConfig& trigger) {
  const ScopeNode& target = target_scope(doc, cursor, tree, trigger);
  ScopeCutContext ctx;
  ctx.family = doc.family();
  ctx.kind = kind;
  ctx.module_scope = target.is_module();
  ctx.header_indent = target.indent;
  ctx.closer_exists = target.closer.has_value();
  ctx.closer_on_cursor_line =
      ctx.closer_exists && target.closer->line == cursor.line;
  ctx.header_on_cursor_line = doc.family() == LanguageFamily::kIndentScoped &&
                              !target.is_module() &&
                              target.header_line == cursor.line;
  ctx.tab_width = tree.tab_width;
  return ctx;
}

ScopeCutMonitor::ScopeCutMonitor(const ScopeCutContext& context)
    : ctx_(context) {}

std::optional<CutPoint> ScopeCutMonitor::feed(std::string_view chunk) {
  if (cut_) throw std::logic_error("monitor fed after it reported a cut");
  for (char c : chunk) {
    auto verdict = step(c);
    ++offset_;
    if (verdict) {
      cut_ = verdict;
      return verdict;
    }
  }
  return std::nullopt;
}

std::optional<CutPoint> ScopeCutMonitor::step(char c) {
  if (ctx_.kind == SuggestionKind::kSingleLine) {
    if (c == '\n') return CutPoint{offset_, CutReason::kStopCondition};
    return std::nullopt;
  }
  return ctx_.family == LanguageFamily::kIndentScoped ? step_indent(c)
                                                      : step_brace(c);
}

std::optional<CutPoint> ScopeCutMonitor::step_indent(char c) {
  if (first_line_) {
    if (c == '\n') {
      first_line_ = false;
      at_line_start_ = true;
      line_indent_ = 0;
    } else if (!text::is_space(c)) {
      if (ctx_.header_on_cursor_line && !first_line_comment_) {
        if (c != '#') return CutPoint{0, CutReason::kScopeClosed};
        first_line_comment_ = true;
      }
      content_end_ = offset_ + 1;
    }
    return std::nullopt;
  }
  if (at_line_start_) {
    if (c == ' ') {
      ++line_indent_;
      return std::nullopt;
    }
    if (c == '\t') {
      line_indent_ += ctx_.tab_width;
      return std::nullopt;
    }
    if (c == '\n') {
      line_indent_ = 0;
      return std::nullopt;
    }
    if (text::is_space(c)) return std::nullopt;
    at_line_start_ = false;
    if (!ctx_.module_scope && line_indent_ <= ctx_.header_indent) {
      return CutPoint{content_end_, CutReason::kScopeClosed};
    }
    content_end_ = offset_ + 1;
    return std::nullopt;
  }
  if (c == '\n') {
    at_line_start_ = true;
    line_indent_ = 0;
  } else if (!text::is_space(c)) {
    content_end_ = offset_ + 1;
  }
  return std::nullopt;
}

std::optional<CutPoint> ScopeCutMonitor::step_brace(char c) {
  switch (lex_) {
    case Lex::kLineComment:
      if (c == '\n') lex_ = Lex::kCode;
      return std::nullopt;
    case Lex::kBlockComment:
      if (saw_star_ && c == '/') lex_ = Lex::kCode;
      saw_star_ = c == '*';
      return std::nullopt;
    case Lex::kString:
      if (escape_) {
        escape_ = false;
      } else if (c == '\\') {
        escape_ = true;
      } else if (c == quote_ || c == '\n') {
        lex_ = Lex::kCode;
      }
      return std::nullopt;
    case Lex::kCode:
      break;
  }
  if (saw_slash_) {
    saw_slash_ = false;
    if (c == '/') {
      lex_ = Lex::kLineComment;
      return std::nullopt;
    }
    if (c == '*') {
      lex_ = Lex::kBlockComment;
      saw_star_ = false;
      return std::nullopt;
    }
  }
  switch (c) {
    case '/':
      saw_slash_ = true;
      break;
    case '"':
    case '\'':
    case '`':
      lex_ = Lex::kString;
      quote_ = c;
      escape_ = false;
      break;
    case '{':
      ++depth_;
      break;
    case '}':
      if (depth_ > 0) {
        --depth_;
        break;
      }
      if (ctx_.module_scope) return CutPoint{offset_, CutReason::kScopeClosed};
      if (ctx_.closer_exists) {
        return CutPoint{offset_, CutReason::kOverlapWithExisting};
      }
      return CutPoint{offset_ + 1, CutReason::kScopeClosed};
    default:
      break;
  }
  return std::nullopt;
}

std::string realign_indentation(std::string_view raw, int expected_indent,
                                int tab_width, bool skip_closer_lines,
                                std::optional<int> first_line_indent) {
  if (first_line_indent == expected_indent) return std::string(raw);
  const std::vector<std::string_view> lines = text::split_lines(raw);
  int min_indent = -1;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    // Closing braces and labels sit at their header's level, not at body level.
    if (skip_closer_lines && (text::trim(lines[i]).front() == '}' ||
                              is_label_line(text::trim(lines[i])))) {
      continue;
    }
    const int w = text::indent_width(lines[i], tab_width);
    min_indent = min_indent < 0 ? w : std::min(min_indent, w);
  }
  if (min_indent < 0 || min_indent == expected_indent) return std::string(raw);
  const int delta = expected_indent - min_indent;
  std::string out(lines[0]);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    out.push_back('\n');
    const std::string_view line = lines[i];
    if (text::is_blank(line)) {
      out += line;
      continue;
    }
    const std::size_t lead = line.find_first_not_of(" \t");
    const int width = text::indent_width(line, tab_width) + delta;
    out.append(static_cast<std::size_t>(std::max(width, 0)), ' ');
    out += line.substr(lead);
  }
  return out;
}

std::string realign_indentation(std::string_view raw, Cursor cursor,
                                const Document& doc,
                                const PostprocessConfig& config) {
  const ScopeTree tree = parse_document(doc);
  const ScopeNode& target = target_scope(doc, cursor, tree);
  return realign_indentation(
      raw, expected_body_indent(tree, doc, target, config.indent_unit),
      tree.tab_width, doc.family() == LanguageFamily::kBraceScoped);
}

TruncatedSuggestion finalize_suggestion(std::string_view raw,
                                        std::optional<CutPoint> cut,
                                        const ScopeTree& tree,
                                        const Document& doc, Cursor cursor,
                                        SuggestionKind kind,
                                        const PostprocessConfig& config,
                                        const TriggerConfig& trigger) {
  TruncatedSuggestion out;
  out.kind = kind;
  if (text::is_blank(raw) ||
      std::all_of(raw.begin(), raw.end(),
                  [](char c) { return text::is_space(c) || c == '\n'; })) {
    return out;
  }
  std::string_view retained = raw;
  if (cut) {
    retained = raw.substr(0, std::min(cut->offset, raw.size()));
    out.cut_offset = text::code_point_count(retained);
    out.cut_reason = cut->reason;
  }

  if (kind == SuggestionKind::kSingleLine) {
    out.text = std::string(
        text::trim_right(retained.substr(0, retained.find('\n'))));
    return out;
  }

  const ScopeNode& target = target_scope(doc, cursor, tree, trigger);
  std::vector<std::string> lines = split_trimmed(retained);
  drop_trailing_blank(lines);
  out.overlap_lines_removed =
      remove_overlap(lines, doc, cursor, config.overlap_window_lines);
  if (out.overlap_lines_removed > 0 && !cut) {
    out.cut_reason = CutReason::kOverlapWithExisting;
  }
  // Only against indentation the document shows; a guessed unit would move
  // correctly indented output.
  const std::optional<int> expected =
      config.realign && lines.size() > 1
          ? documented_body_indent(tree, doc, target)
          : std::nullopt;
  if (expected) {
    const bool brace = doc.family() == LanguageFamily::kBraceScoped;
    // The first line sits at the cursor: its indentation is that of the
    // cursor line, plus its own leading blanks when it starts the line.
    std::optional<int> first_indent;
    const std::string_view first = text::trim(lines[0]);
    if (!first.empty() && !(brace && first.front() == '}')) {
      const std::string_view cursor_line = doc.line(cursor.line);
      const std::string_view before = cursor_line.substr(
          0, text::byte_offset_of_column(cursor_line, cursor.column));
      first_indent = text::is_blank(before)
                         ? text::indent_width(before, tree.tab_width) +
                               text::indent_width(lines[0], tree.tab_width)
                         : text::indent_width(cursor_line, tree.tab_width);
    }
    lines = split_trimmed(realign_indentation(join(lines), *expected, tree.tab_width,
                                              brace, first_indent));
  }
  out.text = join(lines);
  if (lines.size() > 1 && target.closer &&
      target.closer->line == cursor.line) {
    out.text.push_back('\n');
  }
  if (text::is_blank(out.text) &&
      out.text.find('\n') == std::string::npos) {
    out.text.clear();
  }
  return out;
}

TruncatedSuggestion truncate_to_scope(std::string_view raw,
                                      const ScopeTree& tree,
                                      const Document& doc, Cursor cursor,
                                      SuggestionKind kind,
                                      const PostprocessConfig& config,
                                      const TriggerConfig& trigger) {
  ScopeCutMonitor monitor(
      ScopeCutContext::from(doc, cursor, tree, kind, trigger));
  monitor.feed(raw);
  return finalize_suggestion(raw, monitor.cut(), tree, doc, cursor, kind,
                             config, trigger);
}

}  // namespace scopecomplete
