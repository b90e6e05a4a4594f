#ifndef SCOPECOMPLETE_BACKEND_H_
#define SCOPECOMPLETE_BACKEND_H_

#include <atomic>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "scopecomplete/clock.h"
#include "scopecomplete/document.h"
#include "scopecomplete/generation_params.h"
#include "scopecomplete/tokenizer.h"

namespace scopecomplete {

struct PromptWindows {
  int prefix_code_points = 6000;
  int suffix_code_points = 2000;
};

// Fill-in-the-middle request: the model sees code on both sides of the cursor.
struct FimPrompt {
  std::string prefix;
  std::string suffix;
  LanguageFamily family = LanguageFamily::kIndentScoped;
  bool multi_line = false;
};

// Prefix and suffix are cut to the windows, keeping the text nearest to the
// cursor.
FimPrompt build_prompt(const Document& doc, Cursor cursor, bool multi_line,
                       const PromptWindows& windows = {});

// Shared flag; copies observe the same state. cancel() may be called from
// any thread.
class CancellationToken {
 public:
  CancellationToken() : flag_(std::make_shared<std::atomic<bool>>(false)) {}
  void cancel() const { flag_->store(true); }
  bool cancelled() const { return flag_->load(); }

 private:
  std::shared_ptr<std::atomic<bool>> flag_;
};

enum class StreamStatus { kRunning, kCompleted, kCancelled, kTimedOut, kFailed };

std::string_view to_string(StreamStatus status);

// Pull-based chunk stream. next() returns chunks until the stream reaches a
// terminal status, then nullopt forever. Single consumer.
class GenerationStream {
 public:
  virtual ~GenerationStream() = default;
  virtual std::optional<std::string> next() = 0;
  virtual StreamStatus status() const = 0;
  virtual std::string diagnostic() const { return {}; }
};

struct GenerateOptions {
  CancellationToken cancel;
  // Absolute time on the backend's clock; the stream ends TimedOut once the
  // clock passes it.
  std::optional<double> deadline_ms;
};

class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::unique_ptr<GenerationStream> generate(
      const FimPrompt& prompt, const GenerationParams& params,
      const GenerateOptions& options) = 0;
  virtual std::shared_ptr<Clock> clock() const = 0;
};

// Applies stop_at_newline (the newline itself is not emitted), stop
// sequences, max_tokens and a code-point cap to a complete response.
std::string apply_generation_limits(
    std::string_view text, const GenerationParams& params,
    std::size_t char_cap = std::string::npos,
    const Tokenizer& tokenizer = default_tokenizer());

// Incremental form of apply_generation_limits. The concatenation of all
// admit() results and finish() equals apply_generation_limits on the
// concatenated input.
class LimitTracker {
 public:
  explicit LimitTracker(const GenerationParams& params,
                        std::size_t char_cap = std::string::npos,
                        const Tokenizer& tokenizer = default_tokenizer());
  std::string admit(std::string_view chunk);
  // Trailing whitespace held back while more tokens could follow.
  std::string finish();
  // A limit was reached; further input cannot change the result.
  bool done() const { return done_; }

 private:
  GenerationParams params_;
  std::size_t char_cap_;
  const Tokenizer& tokenizer_;
  std::string received_;
  std::size_t emitted_ = 0;
  bool done_ = false;
};

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_BACKEND_H_
