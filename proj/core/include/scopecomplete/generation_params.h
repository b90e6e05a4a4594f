#ifndef SCOPECOMPLETE_GENERATION_PARAMS_H_
#define SCOPECOMPLETE_GENERATION_PARAMS_H_

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace scopecomplete {

enum class SuggestionKind { kSingleLine, kMultiLine };

std::string_view to_string(SuggestionKind kind);

struct GenerationParams {
  int max_tokens = 25;
  bool stop_at_newline = true;
  double temperature = 0.0;
  std::vector<std::string> stop;
  // Passed through to the backend untouched.
  std::map<std::string, std::string> extra;

  void validate() const {
    if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  }
  std::string fingerprint() const;
};

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_GENERATION_PARAMS_H_
