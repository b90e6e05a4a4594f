#include "scopecomplete/backend.h"

#include <algorithm>
#include <cctype>

#include "scopecomplete/text.h"

namespace scopecomplete {

std::string_view to_string(StreamStatus status) {
  switch (status) {
    case StreamStatus::kRunning:
      return "running";
    case StreamStatus::kCompleted:
      return "completed";
    case StreamStatus::kCancelled:
      return "cancelled";
    case StreamStatus::kTimedOut:
      return "timed_out";
    case StreamStatus::kFailed:
      return "failed";
  }
  return "failed";
}

FimPrompt build_prompt(const Document& doc, Cursor cursor, bool multi_line,
                       const PromptWindows& windows) {
  const std::size_t at = doc.offset_of(cursor);
  const std::string_view all = doc.text();
  FimPrompt prompt;
  prompt.prefix = std::string(text::tail_code_points(
      all.substr(0, at), std::max(windows.prefix_code_points, 0)));
  prompt.suffix = std::string(text::head_code_points(
      all.substr(at), std::max(windows.suffix_code_points, 0)));
  prompt.family = doc.family();
  prompt.multi_line = multi_line;
  return prompt;
}

std::string apply_generation_limits(std::string_view text,
                                    const GenerationParams& params,
                                    std::size_t char_cap,
                                    const Tokenizer& tokenizer) {
  if (params.stop_at_newline) text = text.substr(0, text.find('\n'));
  for (const std::string& stop : params.stop) {
    if (!stop.empty()) text = text.substr(0, text.find(stop));
  }
  text = text.substr(0, tokenizer.prefix_with_tokens(text, params.max_tokens));
  if (char_cap != std::string::npos) text = text::head_code_points(text, char_cap);
  return std::string(text);
}

LimitTracker::LimitTracker(const GenerationParams& params,
                           std::size_t char_cap, const Tokenizer& tokenizer)
    : params_(params), char_cap_(char_cap), tokenizer_(tokenizer) {}

std::string LimitTracker::admit(std::string_view chunk) {
  if (done_) return {};
  received_ += chunk;
  const std::string limited =
      apply_generation_limits(received_, params_, char_cap_, tokenizer_);
  std::string_view stopped = received_;
  if (params_.stop_at_newline) stopped = stopped.substr(0, stopped.find('\n'));
  for (const std::string& stop : params_.stop) {
    if (!stop.empty()) stopped = stopped.substr(0, stopped.find(stop));
  }
  // The cap is final once the capped text cannot lose trailing whitespace to
  // a later token cut and no stop sequence can start inside it any more.
  std::size_t longest_stop = 1;
  for (const std::string& stop : params_.stop) {
    longest_stop = std::max(longest_stop, stop.size());
  }
  const bool capped =
      char_cap_ != std::string::npos &&
      text::code_point_count(limited) >= char_cap_ && !limited.empty() &&
      !std::isspace(static_cast<unsigned char>(limited.back())) &&
      received_.size() >= limited.size() + longest_stop - 1;
  done_ = stopped.size() < received_.size() ||
          tokenizer_.count(stopped) > params_.max_tokens || capped;
  std::size_t ready = limited.size();
  if (!done_) {
    while (ready > emitted_ && std::isspace(static_cast<unsigned char>(
                                   limited[ready - 1]))) {
      --ready;
    }
    // Also hold back a tail that may grow into a stop sequence.
    std::size_t hold = 0;
    for (const std::string& stop : params_.stop) {
      if (stop.empty()) continue;
      for (std::size_t k = std::min(stop.size() - 1, limited.size()); k > hold;
           --k) {
        if (limited.compare(limited.size() - k, k, stop, 0, k) == 0) {
          hold = k;
          break;
        }
      }
    }
    ready = std::min(ready, limited.size() - hold);
    ready = std::max(ready, emitted_);
  }
  if (ready <= emitted_) return {};
  std::string out = limited.substr(emitted_, ready - emitted_);
  emitted_ = ready;
  return out;
}

std::string LimitTracker::finish() {
  const std::string limited =
      apply_generation_limits(received_, params_, char_cap_, tokenizer_);
  if (limited.size() <= emitted_) return {};
  std::string out = limited.substr(emitted_);
  emitted_ = limited.size();
  return out;
}

}  // namespace scopecomplete
