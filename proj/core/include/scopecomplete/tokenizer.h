#ifndef SCOPECOMPLETE_TOKENIZER_H_
#define SCOPECOMPLETE_TOKENIZER_H_

#include <cstddef>
#include <string_view>

namespace scopecomplete {

// Token model used to enforce generation limits without a real vocabulary.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual int count(std::string_view text) const = 0;
  // Byte length of the longest prefix of `text` holding at most `max_tokens`
  // tokens; it ends right after the last token it keeps.
  virtual std::size_t prefix_with_tokens(std::string_view text,
                                         int max_tokens) const = 0;
};

// A run of identifier characters (letters, digits, '_', any non-ASCII code
// point) is one token; every other non-whitespace character is one token.
class WordPieceTokenizer : public Tokenizer {
 public:
  int count(std::string_view text) const override;
  std::size_t prefix_with_tokens(std::string_view text,
                                 int max_tokens) const override;
};

const Tokenizer& default_tokenizer();

inline int token_count(std::string_view text) {
  return default_tokenizer().count(text);
}

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_TOKENIZER_H_
