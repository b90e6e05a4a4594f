#include "scopecomplete/tokenizer.h"

#include <cctype>

namespace scopecomplete {
namespace {

bool word_byte(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

bool space_byte(unsigned char c) { return std::isspace(c) != 0; }

// Calls on_token(end_offset) for each token; stops when it returns false.
template <typename F>
void scan(std::string_view text, F on_token) {
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (space_byte(c)) {
      ++i;
      continue;
    }
    if (word_byte(c)) {
      while (i < text.size() && word_byte(static_cast<unsigned char>(text[i]))) {
        ++i;
      }
    } else {
      ++i;
    }
    if (!on_token(i)) return;
  }
}

}  // namespace

int WordPieceTokenizer::count(std::string_view text) const {
  int n = 0;
  scan(text, [&](std::size_t) {
    ++n;
    return true;
  });
  return n;
}

std::size_t WordPieceTokenizer::prefix_with_tokens(std::string_view text,
                                                   int max_tokens) const {
  std::size_t end = 0;
  int n = 0;
  bool over = false;
  scan(text, [&](std::size_t token_end) {
    if (n == max_tokens) {
      over = true;
      return false;
    }
    ++n;
    end = token_end;
    return true;
  });
  return over ? end : text.size();
}

const Tokenizer& default_tokenizer() {
  static const WordPieceTokenizer tokenizer;
  return tokenizer;
}

}  // namespace scopecomplete
