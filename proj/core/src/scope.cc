#include "scopecomplete/scope.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <utility>

#include "scopecomplete/text.h"

namespace scopecomplete {
namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Splits the identifier words of `s` in order of appearance.
std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_ident_char(s[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < s.size() && is_ident_char(s[i])) ++i;
    out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <std::size_t N>
bool one_of(std::string_view w, const std::array<std::string_view, N>& set) {
  return std::find(set.begin(), set.end(), w) != set.end();
}

Position end_sentinel(const Document& doc) { return {doc.line_count(), 0}; }

// ---------------------------------------------------------------------------
// Indentation family.

// Lexer state carried across physical lines.
struct IndentLexer {
  char triple_quote = 0;  // non-zero while inside a triple-quoted string
  int bracket_depth = 0;
  bool backslash = false;

  bool continuing() const {
    return triple_quote != 0 || bracket_depth > 0 || backslash;
  }

  // Scans one physical line, appending code characters (strings replaced by
  // a placeholder, comments dropped) to `code`.
  void scan(std::string_view line, std::string& code) {
    backslash = false;
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (triple_quote != 0) {
        if (c == '\\') {
          i += 2;
          continue;
        }
        if (c == triple_quote && line.substr(i, 3) ==
                                     std::string(3, triple_quote)) {
          triple_quote = 0;
          code.push_back('S');
          i += 3;
          continue;
        }
        ++i;
        continue;
      }
      if (c == '#') break;
      if (c == '"' || c == '\'') {
        if (line.substr(i, 3) == std::string(3, c)) {
          triple_quote = c;
          i += 3;
          continue;
        }
        // Single-line string; unterminated strings end at end of line.
        ++i;
        while (i < line.size() && line[i] != c) {
          i += line[i] == '\\' ? 2 : 1;
        }
        ++i;
        code.push_back('S');
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++bracket_depth;
      if ((c == ')' || c == ']' || c == '}') && bracket_depth > 0) {
        --bracket_depth;
      }
      code.push_back(c);
      ++i;
    }
    const std::string_view trimmed = text::trim_right(code);
    if (triple_quote == 0 && !trimmed.empty() && trimmed.back() == '\\') {
      backslash = true;
      code.resize(trimmed.size() - 1);
    }
  }
};

std::optional<ScopeKind> header_kind(std::string_view first_line,
                                     std::string_view code,
                                     const ScopeConfig& config) {
  const std::string_view tail = text::trim_right(code);
  if (tail.empty() || tail.back() != ':') return std::nullopt;
  const std::vector<std::string_view> ws = words(first_line);
  if (ws.empty()) return std::nullopt;
  // The first word must start the line.
  const std::string_view lead = text::trim(first_line);
  if (lead.substr(0, ws[0].size()) != ws[0]) return std::nullopt;
  std::string_view keyword = ws[0];
  if (keyword == "async" && ws.size() > 1) keyword = ws[1];
  const auto it = config.indent_headers.find(keyword);
  if (it == config.indent_headers.end()) return std::nullopt;
  return it->second;
}

ScopeTree parse_indent(const Document& doc, const ScopeConfig& config) {
  ScopeTree tree;
  tree.doc_version = doc.version();
  tree.family = LanguageFamily::kIndentScoped;
  tree.tab_width = config.tab_width;
  tree.blank_lines.assign(doc.line_count(), false);

  std::vector<ScopeNode> stack;
  ScopeNode module;
  module.kind = ScopeKind::kModule;
  module.indent = -1;
  module.body_start = {0, 0};
  module.body_end = end_sentinel(doc);
  stack.push_back(std::move(module));

  auto close_top = [&](Position end) {
    ScopeNode node = std::move(stack.back());
    stack.pop_back();
    node.body_end = end;
    stack.back().children.push_back(std::move(node));
  };

  IndentLexer lexer;
  int logical_start = -1;
  int logical_indent = 0;
  std::string code;

  auto finish_logical = [&](int last_line) {
    const std::string_view first_line = doc.line(logical_start);
    if (auto kind = header_kind(first_line, code, config)) {
      ScopeNode node;
      node.kind = *kind;
      node.header_line = logical_start;
      node.indent = logical_indent;
      node.body_start = {last_line + 1, 0};
      node.body_end = end_sentinel(doc);
      stack.push_back(std::move(node));
    }
    logical_start = -1;
    code.clear();
  };

  for (int i = 0; i < doc.line_count(); ++i) {
    const std::string_view line = doc.line(i);
    if (!lexer.continuing()) {
      if (text::is_blank(line)) {
        tree.blank_lines[i] = true;
        continue;
      }
      logical_start = i;
      logical_indent = text::indent_width(line, config.tab_width);
      while (stack.size() > 1 && stack.back().indent >= logical_indent) {
        close_top({i, 0});
      }
    }
    lexer.scan(line, code);
    code.push_back(' ');
    if (!lexer.continuing()) finish_logical(i);
  }
  if (logical_start >= 0) finish_logical(doc.line_count() - 1);
  while (stack.size() > 1) close_top(end_sentinel(doc));
  tree.root = std::move(stack.back());
  return tree;
}

// ---------------------------------------------------------------------------
// Brace family.

ScopeTree parse_brace(const Document& doc, const ScopeConfig& config) {
  ScopeTree tree;
  tree.doc_version = doc.version();
  tree.family = LanguageFamily::kBraceScoped;
  tree.tab_width = config.tab_width;
  tree.blank_lines.assign(doc.line_count(), false);
  for (int i = 0; i < doc.line_count(); ++i) {
    tree.blank_lines[i] = text::is_blank(doc.line(i));
  }

  std::vector<ScopeNode> stack;
  ScopeNode module;
  module.kind = ScopeKind::kModule;
  module.indent = -1;
  module.body_end = end_sentinel(doc);
  stack.push_back(std::move(module));

  enum class State { kCode, kLineComment, kBlockComment, kString };
  State state = State::kCode;
  char quote = 0;
  std::string segment;
  int segment_line = -1;
  auto reset_segment = [&] {
    segment.clear();
    segment_line = -1;
  };

  const std::string& s = doc.text();
  int line = 0;
  int col = 0;
  bool line_has_code = false;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    const std::size_t len = text::sequence_length(s, i);
    if (c == '\n') {
      if (state == State::kLineComment ||
          (state == State::kString)) {
        state = State::kCode;
      }
      if (state == State::kCode) segment.push_back(' ');
      ++line;
      col = 0;
      line_has_code = false;
      ++i;
      continue;
    }
    switch (state) {
      case State::kLineComment:
        break;
      case State::kBlockComment:
        if (c == '*' && i + 1 < s.size() && s[i + 1] == '/') {
          state = State::kCode;
          i += 2;
          col += 2;
          continue;
        }
        break;
      case State::kString:
        if (c == '\\' && i + 1 < s.size() && s[i + 1] != '\n') {
          i += 1 + text::sequence_length(s, i + 1);
          col += 2;
          continue;
        }
        if (c == quote) state = State::kCode;
        break;
      case State::kCode: {
        const bool first_on_line = !line_has_code && !text::is_space(c);
        if (!text::is_space(c)) line_has_code = true;
        if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
          state = State::kLineComment;
        } else if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
          state = State::kBlockComment;
          i += 2;
          col += 2;
          continue;
        } else if (c == '#' && first_on_line) {
          state = State::kLineComment;
          reset_segment();
        } else if (c == '"' || c == '\'' || c == '`') {
          state = State::kString;
          quote = c;
          segment.push_back('S');
          if (segment_line < 0) segment_line = line;
        } else if (c == '{') {
          ScopeNode node;
          node.kind = classify_brace_header(segment);
          node.header_line = segment_line >= 0 ? segment_line : line;
          node.indent = text::indent_width(doc.line(node.header_line),
                                           config.tab_width);
          node.body_start = {line, col + 1};
          node.body_end = end_sentinel(doc);
          stack.push_back(std::move(node));
          reset_segment();
        } else if (c == '}') {
          if (stack.size() > 1) {
            ScopeNode node = std::move(stack.back());
            stack.pop_back();
            node.closer = Position{line, col};
            node.body_end = {line, col + 1};
            stack.back().children.push_back(std::move(node));
          }
          reset_segment();
        } else if (c == ';') {
          reset_segment();
        } else if (c == ':' && !(i + 1 < s.size() && s[i + 1] == ':') &&
                   !(i > 0 && s[i - 1] == ':')) {
          reset_segment();
        } else {
          segment.append(s, i, len);
          if (segment_line < 0 && !text::is_space(c)) segment_line = line;
        }
        break;
      }
    }
    i += len;
    ++col;
  }
  while (stack.size() > 1) {
    ScopeNode node = std::move(stack.back());
    stack.pop_back();
    node.body_end = end_sentinel(doc);
    stack.back().children.push_back(std::move(node));
  }
  tree.root = std::move(stack.back());
  return tree;
}

void check_fresh(const ScopeTree& tree, const Document& doc) {
  if (tree.doc_version != doc.version() || tree.family != doc.family() ||
      static_cast<int>(tree.blank_lines.size()) != doc.line_count()) {
    throw StaleTreeError();
  }
}

std::string_view text_after(const Document& doc, Cursor cursor) {
  const std::string_view line = doc.line(cursor.line);
  return line.substr(text::byte_offset_of_column(line, cursor.column));
}

std::string_view text_before(const Document& doc, Cursor cursor) {
  const std::string_view line = doc.line(cursor.line);
  return line.substr(0, text::byte_offset_of_column(line, cursor.column));
}

// Header text in front of a trailing '{' of `before`, looking one line up
// when the brace stands alone (Allman style).
std::string brace_header_for(const Document& doc, Cursor cursor,
                             std::string_view before) {
  std::string_view head = before.substr(0, before.size() - 1);
  const std::size_t cut = head.find_last_of(";{}");
  if (cut != std::string_view::npos) head = head.substr(cut + 1);
  if (!text::trim(head).empty() || cut != std::string_view::npos) {
    return std::string(text::trim(head));
  }
  for (int l = cursor.line - 1; l >= 0; --l) {
    const std::string_view prev = text::trim(doc.line(l));
    if (prev.empty()) continue;
    const char last = prev.back();
    if (last == ';' || last == '{' || last == '}') return {};
    return std::string(prev);
  }
  return {};
}

void find_opened_on_line(const ScopeNode& node, LanguageFamily family,
                         int line, const ScopeNode*& found) {
  for (const ScopeNode& child : node.children) {
    const bool match = family == LanguageFamily::kIndentScoped
                           ? child.header_line == line
                           : child.body_start.line == line;
    if (match) found = &child;
    find_opened_on_line(child, family, line, found);
  }
}

}  // namespace

std::string_view to_string(ScopeKind kind) {
  switch (kind) {
    case ScopeKind::kModule:
      return "module";
    case ScopeKind::kFunction:
      return "function";
    case ScopeKind::kClass:
      return "class";
    case ScopeKind::kConditional:
      return "conditional";
    case ScopeKind::kLoop:
      return "loop";
    case ScopeKind::kBlock:
      return "block";
    case ScopeKind::kNotebookCell:
      return "notebook_cell";
    case ScopeKind::kOther:
      return "other";
  }
  return "other";
}

CloserSet::CloserSet(std::string chars) : chars_(std::move(chars)) {
  if (chars_.empty()) throw std::invalid_argument("closer set is empty");
  for (char c : chars_) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("closer set contains alphanumerics");
    }
  }
}

bool CloserSet::only_closers(std::string_view s) const {
  return std::all_of(s.begin(), s.end(),
                     [&](char c) { return text::is_space(c) || contains(c); });
}

ScopeKind classify_brace_header(std::string_view header) {
  static constexpr std::array<std::string_view, 4> kConditional = {
      "if", "else", "switch", "match"};
  static constexpr std::array<std::string_view, 5> kLoop = {
      "for", "while", "do", "loop", "foreach"};
  static constexpr std::array<std::string_view, 9> kClass = {
      "class",  "struct", "union", "enum",  "interface",
      "trait",  "impl",   "record", "object"};
  static constexpr std::array<std::string_view, 4> kFunction = {
      "fn", "func", "function", "def"};
  static constexpr std::array<std::string_view, 7> kBlock = {
      "try",    "catch",  "finally",     "namespace",
      "unsafe", "extern", "synchronized"};

  const std::string_view h = text::trim(header);
  if (h.empty()) return ScopeKind::kBlock;
  const std::vector<std::string_view> ws = words(h);
  const bool starts_with_word =
      !ws.empty() && h.substr(0, ws[0].size()) == ws[0];
  if (starts_with_word) {
    if (one_of(ws[0], kConditional)) return ScopeKind::kConditional;
    if (one_of(ws[0], kLoop)) return ScopeKind::kLoop;
    if (one_of(ws[0], kBlock)) return ScopeKind::kBlock;
  }
  const std::string_view before_paren = h.substr(0, h.find('('));
  for (std::string_view w : words(before_paren)) {
    if (one_of(w, kClass)) return ScopeKind::kClass;
    if (one_of(w, kFunction)) return ScopeKind::kFunction;
  }
  const std::size_t rparen = h.rfind(')');
  if (rparen != std::string_view::npos && h.find('(') != std::string_view::npos) {
    const std::string_view rest = text::trim(h.substr(rparen + 1));
    if (rest.empty() || rest.substr(0, 2) == "=>" ||
        rest.find("->") != std::string_view::npos) {
      return ScopeKind::kFunction;
    }
    const bool qualifiers_only =
        std::all_of(rest.begin(), rest.end(), [](char c) {
          return is_ident_char(c) || text::is_space(c) || c == ':' ||
                 c == '<' || c == '>' || c == '&' || c == '*' || c == ',';
        });
    if (qualifiers_only) return ScopeKind::kFunction;
  }
  return ScopeKind::kOther;
}

std::optional<ScopeKind> classify_indent_header(std::string_view line,
                                                const ScopeConfig& config) {
  IndentLexer lexer;
  std::string code;
  lexer.scan(line, code);
  return header_kind(line, code, config);
}

ScopeTree parse_document(const Document& doc, const ScopeConfig& config) {
  return doc.family() == LanguageFamily::kIndentScoped
             ? parse_indent(doc, config)
             : parse_brace(doc, config);
}

std::vector<const ScopeNode*> scope_chain(const ScopeTree& tree,
                                          const Document& doc, Cursor cursor) {
  check_fresh(tree, doc);
  if (!doc.is_valid(cursor)) {
    throw InvalidPositionError("cursor outside document");
  }
  std::vector<const ScopeNode*> chain{&tree.root};
  for (;;) {
    const auto& children = chain.back()->children;
    auto it = std::upper_bound(
        children.begin(), children.end(), cursor,
        [](Position p, const ScopeNode& n) { return p < n.body_start; });
    if (it == children.begin()) break;
    --it;
    if (!it->contains(cursor)) break;
    chain.push_back(&*it);
  }
  if (tree.family == LanguageFamily::kIndentScoped &&
      tree.blank_lines[cursor.line]) {
    while (chain.size() > 1 && chain.back()->indent >= cursor.column) {
      chain.pop_back();
    }
  }
  return chain;
}

const ScopeNode& innermost_scope(const ScopeTree& tree, const Document& doc,
                                 Cursor cursor) {
  return *scope_chain(tree, doc, cursor).back();
}

bool is_at_end_of_scope(const ScopeTree& tree, const Document& doc,
                        Cursor cursor, const CloserSet& closers) {
  const ScopeNode& scope = innermost_scope(tree, doc, cursor);
  if (tree.family == LanguageFamily::kIndentScoped) {
    if (!closers.only_closers(text_after(doc, cursor))) return false;
    const int last = std::min(scope.body_end.line, doc.line_count());
    for (int l = cursor.line + 1; l < last; ++l) {
      if (!text::is_blank(doc.line(l))) return false;
    }
    return true;
  }
  const std::size_t begin = doc.offset_of(cursor);
  const std::size_t end = scope.closer ? doc.offset_of(*scope.closer)
                                       : doc.text().size();
  const std::string_view rest =
      std::string_view(doc.text()).substr(begin, end - begin);
  const std::size_t nl = rest.find('\n');
  if (!closers.only_closers(rest.substr(0, nl))) return false;
  if (nl == std::string_view::npos) return true;
  return std::all_of(rest.begin() + nl + 1, rest.end(), [](char c) {
    return text::is_space(c) || c == '\n';
  });
}

LineContext line_context(const Document& doc, Cursor cursor,
                         const CloserSet& closers, const ScopeConfig& config) {
  if (!doc.is_valid(cursor)) {
    throw InvalidPositionError("cursor outside document");
  }
  LineContext ctx;
  const std::string_view before = text_before(doc, cursor);
  const std::string_view after = text_after(doc, cursor);
  ctx.text_before_cursor = std::string(before);
  ctx.text_after_cursor = std::string(after);
  ctx.after_is_closers_only = closers.only_closers(after);
  if (doc.family() == LanguageFamily::kIndentScoped) {
    ctx.defines_new_scope = classify_indent_header(before, config).has_value();
  } else {
    const std::string_view trimmed = text::trim_right(before);
    if (!trimmed.empty() && trimmed.back() == '{' &&
        trimmed.find("//") == std::string_view::npos) {
      const ScopeKind kind =
          classify_brace_header(brace_header_for(doc, cursor, trimmed));
      ctx.defines_new_scope = kind != ScopeKind::kOther;
    }
  }
  return ctx;
}

const ScopeNode* scope_opened_on_line(const ScopeTree& tree, int line) {
  const ScopeNode* found = nullptr;
  find_opened_on_line(tree.root, tree.family, line, found);
  return found;
}

bool is_label_line(std::string_view trimmed) {
  if (trimmed.size() < 2 || trimmed.back() != ':') return false;
  const std::string_view head = trimmed.substr(0, trimmed.size() - 1);
  if (head.find(':') != std::string_view::npos) return false;
  const auto c0 = static_cast<unsigned char>(head.front());
  if (!std::isalpha(c0) && c0 != '_') return false;
  return std::all_of(head.begin(), head.end(), [](char ch) {
    const auto c = static_cast<unsigned char>(ch);
    return std::isalnum(c) || c == '_' || c == ' ' || c == '\'';
  });
}

namespace {

bool skip_for_indent(const ScopeTree& tree, std::string_view line) {
  const std::string_view t = text::trim(line);
  if (t.empty()) return true;
  return tree.family == LanguageFamily::kBraceScoped &&
         (t.front() == '}' || is_label_line(t));
}

}  // namespace

std::optional<int> indent_unit_of(const ScopeTree& tree, const Document& doc) {
  std::map<int, int> steps;
  int prev = -1;
  for (int l = 0; l < doc.line_count(); ++l) {
    const std::string_view line = doc.line(l);
    if (skip_for_indent(tree, line)) continue;
    const int w = text::indent_width(line, tree.tab_width);
    if (prev >= 0 && w > prev) ++steps[w - prev];
    prev = w;
  }
  std::optional<int> best;
  int best_count = 0;
  for (const auto& [step, count] : steps) {
    if (count > best_count) {
      best = step;
      best_count = count;
    }
  }
  return best;
}

std::optional<int> documented_body_indent(const ScopeTree& tree, const Document& doc,
                                          const ScopeNode& scope) {
  if (scope.is_module()) return 0;
  int first = scope.body_start.line;
  int last = std::min(scope.body_end.line, doc.line_count());
  if (tree.family == LanguageFamily::kBraceScoped) {
    ++first;
    if (scope.closer) last = scope.closer->line;
  }
  for (int l = first; l < last; ++l) {
    if (tree.family == LanguageFamily::kIndentScoped ? tree.blank_lines[l]
                                                     : skip_for_indent(tree, doc.line(l))) {
      continue;
    }
    return text::indent_width(doc.line(l), tree.tab_width);
  }
  if (const auto unit = indent_unit_of(tree, doc)) return scope.indent + *unit;
  return std::nullopt;
}

int expected_body_indent(const ScopeTree& tree, const Document& doc,
                         const ScopeNode& scope, int indent_unit) {
  return documented_body_indent(tree, doc, scope).value_or(scope.indent + indent_unit);
}

}  // namespace scopecomplete
