#ifndef SCOPECOMPLETE_ENGINE_H_
#define SCOPECOMPLETE_ENGINE_H_

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "scopecomplete/backend.h"
#include "scopecomplete/cache.h"
#include "scopecomplete/config.h"
#include "scopecomplete/document.h"
#include "scopecomplete/postprocess.h"
#include "scopecomplete/scope.h"
#include "scopecomplete/telemetry.h"
#include "scopecomplete/trigger.h"

namespace scopecomplete {

// Misuse of the document/request protocol by the client.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownRequestError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// The suggestion was invalidated by an edit before it could be accepted.
class SuggestionInvalidatedError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

struct CompletionRequest {
  // Assigned by the engine when empty.
  std::string request_id;
  std::string uri;
  std::int64_t version = 0;
  Cursor cursor;
  RequestOrigin origin;
  // Engine clock; absent means "now".
  std::optional<double> received_at_ms;
};

struct Suggestion {
  std::string text;
  SuggestionKind kind = SuggestionKind::kSingleLine;
  Position insert_at;
};

enum class CompletionOutcome {
  kSuggested,
  kSuppressed,
  // Generation produced nothing usable.
  kEmpty,
  kFailed,
  kTimedOut,
  // Cancelled by an edit, a newer request, or a stale version.
  kInvalidated,
};

std::string_view to_string(CompletionOutcome outcome);

struct CompletionResponse {
  std::string request_id;
  // Present iff outcome == kSuggested.
  std::optional<Suggestion> suggestion;
  bool served_from_cache = false;
  double generation_latency_ms = 0;
  TriggerDecision decision = TriggerDecision::suppress();
  CompletionOutcome outcome = CompletionOutcome::kSuppressed;
  CutReason cut_reason = CutReason::kNone;
  // The backend was stopped at a scope cut before it finished.
  bool cancelled_at_cut = false;
  std::string diagnostic;
};

struct FetchingMultilineNotice {
  std::string request_id;
  std::string uri;
  bool started = true;
};

using NotificationHandler = std::function<void(const FetchingMultilineNotice&)>;

class CompletionEngine;

// One request in flight. Produced by CompletionEngine::start_completion and
// advanced by step() (one backend chunk per call) or run(). A job is driven
// by one thread at a time; the engine may cancel it from any thread.
class CompletionJob {
 public:
  const std::string& request_id() const { return request_id_; }
  bool done() const;
  // Pulls at most one chunk. With `block`, waits for the document's previous
  // generation to release the backend instead of returning early. Returns
  // done().
  bool step(bool block = false);
  // Steps until done.
  const CompletionResponse& run();
  // Valid once done().
  const CompletionResponse& response() const;

 private:
  friend class CompletionEngine;
  CompletionJob() = default;

  CompletionEngine* engine_ = nullptr;
  std::string request_id_;
  std::string uri_;
  Document doc_;
  std::shared_ptr<const ScopeTree> tree_;
  Cursor cursor_;
  TriggerDecision decision_ = TriggerDecision::suppress();
  SuggestionKind kind_ = SuggestionKind::kSingleLine;
  GenerationParams params_;
  FimPrompt prompt_;
  CacheKey cache_key_;
  double received_at_ms_ = 0;
  double deadline_ms_ = 0;
  GenerateOptions options_;

  // Guarded by the engine mutex.
  std::unique_ptr<GenerationStream> stream_;
  std::optional<ScopeCutMonitor> monitor_;
  std::string raw_;
  bool started_notice_ = false;
  bool in_step_ = false;
  bool cancelled_ = false;
  bool done_ = false;
  CompletionResponse response_;
};

// Server state: open documents, in-flight jobs, the suggestion cache and the
// telemetry lifecycle of every request. Thread-safe.
class CompletionEngine {
 public:
  CompletionEngine(ServerConfig config, std::shared_ptr<ModelBackend> backend,
                   std::shared_ptr<TelemetrySink> telemetry = nullptr,
                   NotificationHandler notify = {});
  ~CompletionEngine();
  CompletionEngine(const CompletionEngine&) = delete;
  CompletionEngine& operator=(const CompletionEngine&) = delete;

  // Throws ProtocolError for an unsupported language or a reopened uri.
  void open_document(const std::string& uri, const std::string& language_id,
                     std::int64_t version, std::string text);
  // Version must increase. Cancels in-flight work and pending suggestions
  // for the document; drops its cached scope tree.
  void apply_document_edit(const std::string& uri, std::int64_t new_version,
                           const std::vector<TextEdit>& edits);
  void close_document(const std::string& uri);
  // Invalidates like an edit when invalidate_on_cursor_move is set.
  void cursor_moved(const std::string& uri, Cursor cursor);
  std::optional<Document> document(const std::string& uri) const;

  // Decides, consults the cache and prepares generation. Cancels the
  // document's previous request. Suppressed, cached and invalid requests
  // come back already done.
  std::shared_ptr<CompletionJob> start_completion(CompletionRequest request);
  // start_completion + run.
  CompletionResponse handle_inline_completion(CompletionRequest request);

  // Client follow-ups. displayed/rejected ignore unknown ids and return
  // false.
  bool suggestion_displayed(const std::string& request_id);
  // Returns the cursor position after inserting the suggestion.
  Position accept_suggestion(const std::string& request_id);
  bool reject_suggestion(const std::string& request_id);

  // Records characters the user typed by hand.
  void record_typed(const std::string& uri, std::size_t chars);

  // Cancels everything and settles every pending suggestion.
  void shutdown();

  const ServerConfig& config() const { return config_; }
  std::shared_ptr<Clock> clock() const { return clock_; }
  SuggestionCache& cache() { return cache_; }
  std::size_t pending_suggestions() const;

 private:
  friend class CompletionJob;

  struct DocState {
    Document doc;
    std::shared_ptr<const ScopeTree> tree;
    std::shared_ptr<CompletionJob> active;
    // Job holding the backend for this document, if any.
    CompletionJob* generating = nullptr;
    bool closed = false;
  };

  struct Pending {
    std::string uri;
    Suggestion suggestion;
    std::size_t chars = 0;
    double latency_ms = 0;
    std::optional<double> displayed_at_ms;
  };

  using Lock = std::unique_lock<std::mutex>;

  DocState& doc_state(const std::string& uri);
  std::shared_ptr<const ScopeTree> tree_for(DocState& state);
  void invalidate_document_locked(DocState& state, const std::string& uri);
  void cancel_job_locked(CompletionJob& job);
  void settle_pending_locked(const std::string& request_id, Pending& pending,
                             bool rejected);
  void retire_locked(const std::string& request_id, std::string reason);
  void finish_job_locked(CompletionJob& job, CompletionOutcome outcome,
                         std::optional<CutPoint> cut, std::string diagnostic);
  void emit(TelemetryKind kind, const std::string& request_id,
            const std::string& uri, std::optional<SuggestionKind> suggestion_kind,
            std::size_t chars = 0, std::optional<double> latency_ms = {},
            std::optional<double> display_ms = {}, std::string detail = {});
  bool step_job(CompletionJob& job, bool block);

  ServerConfig config_;
  std::shared_ptr<ModelBackend> backend_;
  std::shared_ptr<TelemetrySink> telemetry_;
  NotificationHandler notify_;
  std::shared_ptr<Clock> clock_;
  SuggestionCache cache_;

  mutable std::mutex mu_;
  std::condition_variable backend_released_;
  std::unordered_map<std::string, DocState> docs_;
  std::map<std::string, Pending> pending_;
  // Recently settled request ids -> why, for accept() diagnostics.
  std::unordered_map<std::string, std::string> retired_;
  std::deque<std::string> retired_order_;
  std::uint64_t next_id_ = 1;
};

// Backend described by the config: the mock (corpus loaded from disk) or the
// HTTP adapter.
std::shared_ptr<ModelBackend> make_backend(const ServerConfig& config,
                                           std::shared_ptr<Clock> clock);

// JSONL file sink when the config names one, else nullptr.
std::shared_ptr<TelemetrySink> make_telemetry_sink(const ServerConfig& config);

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_ENGINE_H_
