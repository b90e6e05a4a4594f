#include "scopecomplete/generation_params.h"

#include "scopecomplete/text.h"

namespace scopecomplete {

std::string_view to_string(SuggestionKind kind) {
  return kind == SuggestionKind::kMultiLine ? "multi_line" : "single_line";
}

std::string GenerationParams::fingerprint() const {
  std::string s = std::to_string(max_tokens) + "|" +
                  (stop_at_newline ? "nl" : "-") + "|" +
                  std::to_string(temperature);
  for (const auto& stop_seq : stop) s += "|s:" + stop_seq;
  for (const auto& [k, v] : extra) s += "|" + k + "=" + v;
  return text::to_hex(text::fnv1a(s));
}

}  // namespace scopecomplete
