#ifndef SCOPECOMPLETE_MOCK_BACKEND_H_
#define SCOPECOMPLETE_MOCK_BACKEND_H_

#include <atomic>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scopecomplete/backend.h"

namespace scopecomplete {

// Continuations keyed by a fingerprint of the last code points of the prompt
// prefix. Lookups prefer the longest context length that matches.
class MockCorpus {
 public:
  static constexpr int kDefaultContext = 512;

  static std::string fingerprint(std::string_view prefix,
                                 int context_code_points = kDefaultContext);

  void add(std::string_view prefix, std::string continuation,
           int context_code_points = kDefaultContext);
  void add_fingerprint(std::string fingerprint, std::string continuation,
                       int context_code_points = kDefaultContext);

  const std::string* lookup(std::string_view prefix) const;
  std::size_t size() const;

  // Line-delimited JSON records
  //   {"context_fingerprint": "...", "continuation": "...",
  //    "context_code_points": 512}
  // preceded by an optional header record {"version": 1}. Throws
  // std::runtime_error naming the offending line.
  static MockCorpus load(std::istream& in);
  static MockCorpus load_file(const std::string& path);
  void save(std::ostream& out) const;

 private:
  // context length -> fingerprint -> continuation
  std::map<int, std::map<std::string, std::string>, std::greater<>> entries_;
};

struct MockConfig {
  int chunk_code_points = 8;
  double first_chunk_ms = 0;
  // Charged per token of each chunk after the first.
  double per_token_ms = 0;
  // Produce a small templated block when the corpus has no entry.
  bool fallback = false;
};

// Corpus continuation for `prompt`, or the fallback template, or "".
std::string mock_corpus_lookup(const FimPrompt& prompt, const MockCorpus& corpus,
                               bool fallback);

// Raw continuation for a prompt, before generation limits.
using ContinuationSource = std::function<std::string(const FimPrompt&)>;

class MockBackend : public ModelBackend {
 public:
  MockBackend(std::shared_ptr<const MockCorpus> corpus, MockConfig config = {},
              std::shared_ptr<Clock> clock = steady_clock());
  MockBackend(ContinuationSource source, MockConfig config = {},
              std::shared_ptr<Clock> clock = steady_clock());

  std::unique_ptr<GenerationStream> generate(
      const FimPrompt& prompt, const GenerationParams& params,
      const GenerateOptions& options) override;
  std::shared_ptr<Clock> clock() const override { return clock_; }

  // Number of generate() calls so far.
  int calls() const { return calls_.load(); }

 private:
  ContinuationSource source_;
  MockConfig config_;
  std::shared_ptr<Clock> clock_;
  std::atomic<int> calls_{0};
};

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_MOCK_BACKEND_H_
