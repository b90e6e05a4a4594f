#include "scopecomplete/engine.h"

#include "scopecomplete/http_backend.h"
#include "scopecomplete/mock_backend.h"
#include "scopecomplete/text.h"

namespace scopecomplete {
namespace {

constexpr std::size_t kRetiredLimit = 4096;

}  // namespace

std::string_view to_string(CompletionOutcome outcome) {
  switch (outcome) {
    case CompletionOutcome::kSuggested:
      return "suggested";
    case CompletionOutcome::kSuppressed:
      return "suppressed";
    case CompletionOutcome::kEmpty:
      return "empty";
    case CompletionOutcome::kFailed:
      return "failed";
    case CompletionOutcome::kTimedOut:
      return "timed_out";
    case CompletionOutcome::kInvalidated:
      return "invalidated";
  }
  return "empty";
}

bool CompletionJob::done() const {
  std::lock_guard lock(engine_->mu_);
  return done_;
}

bool CompletionJob::step(bool block) { return engine_->step_job(*this, block); }

const CompletionResponse& CompletionJob::run() {
  while (!step(true)) {
  }
  return response_;
}

const CompletionResponse& CompletionJob::response() const {
  std::lock_guard lock(engine_->mu_);
  if (!done_) throw std::logic_error("completion job still running");
  return response_;
}

CompletionEngine::CompletionEngine(ServerConfig config,
                                   std::shared_ptr<ModelBackend> backend,
                                   std::shared_ptr<TelemetrySink> telemetry,
                                   NotificationHandler notify)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      telemetry_(std::move(telemetry)),
      notify_(std::move(notify)),
      clock_(backend_->clock()),
      cache_(config_.cache_capacity, config_.cache_ttl_ms, clock_) {}

CompletionEngine::~CompletionEngine() { shutdown(); }

void CompletionEngine::open_document(const std::string& uri,
                                     const std::string& language_id,
                                     std::int64_t version, std::string text) {
  const auto family = family_for_language(language_id);
  if (!family) throw ProtocolError("unsupported language: " + language_id);
  std::lock_guard lock(mu_);
  const auto it = docs_.find(uri);
  if (it != docs_.end() && !it->second.closed) {
    throw ProtocolError("document already open: " + uri);
  }
  DocState& state = docs_[uri];
  state.doc = Document(std::move(text), *family, version);
  state.tree.reset();
  state.closed = false;
}

void CompletionEngine::apply_document_edit(const std::string& uri,
                                           std::int64_t new_version,
                                           const std::vector<TextEdit>& edits) {
  std::lock_guard lock(mu_);
  DocState& state = doc_state(uri);
  const Document& old = state.doc;
  if (new_version <= old.version()) {
    throw ProtocolError("document version went from " +
                        std::to_string(old.version()) + " to " +
                        std::to_string(new_version));
  }
  Document next = old;
  try {
    std::int64_t v = old.version();
    for (const TextEdit& edit : edits) next = next.apply(edit, ++v);
  } catch (const InvalidPositionError& e) {
    throw ProtocolError(std::string("edit outside the document: ") + e.what());
  }
  // Even a no-op edit drops the cached tree and pending work.
  invalidate_document_locked(state, uri);
  state.doc = Document(next.text(), old.family(), new_version);
  state.tree.reset();
}

void CompletionEngine::close_document(const std::string& uri) {
  std::lock_guard lock(mu_);
  DocState& state = doc_state(uri);
  invalidate_document_locked(state, uri);
  if (state.generating == nullptr) {
    docs_.erase(uri);
    return;
  }
  // A job is inside next(); the entry goes when it finishes.
  state.closed = true;
}

void CompletionEngine::cursor_moved(const std::string& uri, Cursor) {
  std::lock_guard lock(mu_);
  if (!config_.invalidate_on_cursor_move) return;
  invalidate_document_locked(doc_state(uri), uri);
}

std::optional<Document> CompletionEngine::document(const std::string& uri) const {
  std::lock_guard lock(mu_);
  const auto it = docs_.find(uri);
  if (it == docs_.end() || it->second.closed) return std::nullopt;
  return it->second.doc;
}

std::shared_ptr<CompletionJob> CompletionEngine::start_completion(
    CompletionRequest request) {
  std::lock_guard lock(mu_);
  DocState& state = doc_state(request.uri);
  auto job = std::shared_ptr<CompletionJob>(new CompletionJob());
  CompletionJob& j = *job;
  j.engine_ = this;
  j.request_id_ = request.request_id.empty()
                      ? "r" + std::to_string(next_id_++)
                      : request.request_id;
  if (pending_.count(j.request_id_) != 0) {
    throw ProtocolError("duplicate request id: " + j.request_id_);
  }
  j.uri_ = request.uri;
  j.cursor_ = request.cursor;
  j.received_at_ms_ = request.received_at_ms.value_or(clock_->now_ms());
  j.response_.request_id = j.request_id_;

  // Single flight: the previous request for this document is superseded.
  invalidate_document_locked(state, request.uri);
  state.active = job;

  if (request.version != state.doc.version()) {
    emit(TelemetryKind::kRequested, j.request_id_, j.uri_, std::nullopt);
    finish_job_locked(j, CompletionOutcome::kInvalidated, std::nullopt,
                      "stale document version");
    return job;
  }
  if (!state.doc.is_valid(request.cursor)) {
    state.active.reset();
    throw ProtocolError("cursor outside the document");
  }
  j.doc_ = state.doc;
  j.tree_ = tree_for(state);
  j.decision_ = decide_trigger(j.doc_, j.cursor_, request.origin, *j.tree_,
                               config_.trigger);
  j.response_.decision = j.decision_;
  if (j.decision_.kind() == TriggerKind::kSuppress) {
    emit(TelemetryKind::kRequested, j.request_id_, j.uri_, std::nullopt);
    finish_job_locked(j, CompletionOutcome::kSuppressed, std::nullopt,
                      "suppressed");
    return job;
  }
  j.kind_ = j.decision_.suggestion_kind();
  emit(TelemetryKind::kRequested, j.request_id_, j.uri_, j.kind_);
  j.params_ = generation_params_for(j.decision_, config_.trigger);
  const bool multi = j.kind_ == SuggestionKind::kMultiLine;
  j.prompt_ = build_prompt(j.doc_, j.cursor_, multi, config_.windows);
  j.cache_key_ = CacheKey::from(j.prompt_, j.kind_, j.params_);
  j.deadline_ms_ = j.received_at_ms_ + (multi ? config_.multi_line_timeout_ms
                                              : config_.single_line_timeout_ms);
  j.options_.deadline_ms = j.deadline_ms_;
  j.monitor_.emplace(ScopeCutContext::from(j.doc_, j.cursor_, *j.tree_, j.kind_,
                                           config_.trigger));

  if (auto hit = cache_.lookup(j.cache_key_)) {
    j.response_.served_from_cache = true;
    j.raw_ = std::move(hit->raw);
    j.monitor_->feed(j.raw_);
    finish_job_locked(j, CompletionOutcome::kSuggested, j.monitor_->cut(), {});
    return job;
  }
  if (multi) {
    j.started_notice_ = true;
    if (notify_) notify_({j.request_id_, j.uri_, true});
  }
  return job;
}

CompletionResponse CompletionEngine::handle_inline_completion(
    CompletionRequest request) {
  auto job = start_completion(std::move(request));
  return job->run();
}

bool CompletionEngine::step_job(CompletionJob& job, bool block) {
  Lock lock(mu_);
  if (job.done_) return true;
  if (job.cancelled_) {
    finish_job_locked(job, CompletionOutcome::kInvalidated, std::nullopt,
                      "cancelled");
    return true;
  }
  if (!job.stream_) {
    for (;;) {
      const auto it = docs_.find(job.uri_);
      if (it == docs_.end() || it->second.closed) {
        finish_job_locked(job, CompletionOutcome::kInvalidated, std::nullopt,
                          "document closed");
        return true;
      }
      if (it->second.generating == nullptr) {
        it->second.generating = &job;
        break;
      }
      if (!block) return false;
      backend_released_.wait(lock);
      if (job.done_) return true;
      if (job.cancelled_) {
        finish_job_locked(job, CompletionOutcome::kInvalidated, std::nullopt,
                          "cancelled");
        return true;
      }
    }
    job.stream_ = backend_->generate(job.prompt_, job.params_, job.options_);
  }

  job.in_step_ = true;
  GenerationStream* stream = job.stream_.get();
  lock.unlock();
  std::optional<std::string> chunk = stream->next();
  lock.lock();
  job.in_step_ = false;

  if (job.cancelled_) {
    finish_job_locked(job, CompletionOutcome::kInvalidated, std::nullopt,
                      "cancelled");
    return true;
  }
  if (chunk) {
    job.raw_ += *chunk;
    if (auto cut = job.monitor_->feed(*chunk)) {
      // Stop paying for tokens past the scope.
      job.options_.cancel.cancel();
      job.response_.cancelled_at_cut = true;
      finish_job_locked(job, CompletionOutcome::kSuggested, cut, {});
      return true;
    }
    if (clock_->now_ms() > job.deadline_ms_) {
      finish_job_locked(job, CompletionOutcome::kTimedOut, std::nullopt,
                        "generation timed out");
      return true;
    }
    return false;
  }
  switch (stream->status()) {
    case StreamStatus::kCompleted:
      finish_job_locked(job, CompletionOutcome::kSuggested,
                        job.monitor_->cut(), {});
      break;
    case StreamStatus::kCancelled:
      finish_job_locked(job, CompletionOutcome::kInvalidated, std::nullopt,
                        "cancelled");
      break;
    case StreamStatus::kTimedOut:
      finish_job_locked(job, CompletionOutcome::kTimedOut, std::nullopt,
                        "generation timed out");
      break;
    case StreamStatus::kFailed:
    case StreamStatus::kRunning:
      finish_job_locked(job, CompletionOutcome::kFailed, std::nullopt,
                        "backend failure: " + stream->diagnostic());
      break;
  }
  return true;
}

void CompletionEngine::finish_job_locked(CompletionJob& job,
                                         CompletionOutcome outcome,
                                         std::optional<CutPoint> cut,
                                         std::string diagnostic) {
  if (job.done_) return;
  job.done_ = true;
  job.stream_.reset();
  const auto it = docs_.find(job.uri_);
  if (it != docs_.end() && it->second.generating == &job) {
    it->second.generating = nullptr;
    if (!it->second.active && pending_.empty()) {
      // Closed while generating.
    }
    backend_released_.notify_all();
  }

  CompletionResponse& r = job.response_;
  r.generation_latency_ms = clock_->now_ms() - job.received_at_ms_;
  if (outcome == CompletionOutcome::kSuggested) {
    const TruncatedSuggestion t =
        finalize_suggestion(job.raw_, cut, *job.tree_, job.doc_, job.cursor_,
                            job.kind_, config_.postprocess, config_.trigger);
    r.cut_reason = t.cut_reason;
    if (!r.served_from_cache) cache_.store(job.cache_key_, job.raw_);
    if (t.text.empty()) {
      outcome = CompletionOutcome::kEmpty;
      diagnostic = "nothing left after post-processing";
    } else {
      Pending p;
      p.uri = job.uri_;
      p.suggestion = Suggestion{t.text, job.kind_, job.cursor_};
      p.chars = text::code_point_count(t.text);
      p.latency_ms = r.generation_latency_ms;
      r.suggestion = p.suggestion;
      pending_.emplace(job.request_id_, std::move(p));
    }
  }
  r.outcome = outcome;
  r.diagnostic = std::move(diagnostic);

  const std::optional<SuggestionKind> kind =
      outcome == CompletionOutcome::kSuppressed ||
              (outcome == CompletionOutcome::kInvalidated &&
               r.diagnostic == "stale document version")
          ? std::nullopt
          : std::optional<SuggestionKind>(job.kind_);
  switch (outcome) {
    case CompletionOutcome::kSuggested:
      break;
    case CompletionOutcome::kSuppressed:
    case CompletionOutcome::kEmpty:
    case CompletionOutcome::kFailed:
      emit(TelemetryKind::kEmpty, job.request_id_, job.uri_, kind, 0,
           r.generation_latency_ms, std::nullopt, r.diagnostic);
      break;
    case CompletionOutcome::kTimedOut:
      emit(TelemetryKind::kTimedOut, job.request_id_, job.uri_, kind, 0,
           r.generation_latency_ms);
      break;
    case CompletionOutcome::kInvalidated:
      emit(TelemetryKind::kInvalidated, job.request_id_, job.uri_, kind, 0,
           r.generation_latency_ms, std::nullopt, r.diagnostic);
      break;
  }
  if (job.started_notice_ && notify_) {
    notify_({job.request_id_, job.uri_, false});
  }
  if (it != docs_.end() && it->second.closed && it->second.generating == nullptr) {
    docs_.erase(it);
  }
}

bool CompletionEngine::suggestion_displayed(const std::string& request_id) {
  std::lock_guard lock(mu_);
  const auto it = pending_.find(request_id);
  if (it == pending_.end() || it->second.displayed_at_ms) return false;
  it->second.displayed_at_ms = clock_->now_ms();
  return true;
}

Position CompletionEngine::accept_suggestion(const std::string& request_id) {
  std::lock_guard lock(mu_);
  const auto it = pending_.find(request_id);
  if (it == pending_.end()) {
    const auto retired = retired_.find(request_id);
    if (retired != retired_.end() && retired->second == "invalidated") {
      throw SuggestionInvalidatedError("suggestion " + request_id +
                                       " was invalidated by a later change");
    }
    throw UnknownRequestError("no pending suggestion " + request_id);
  }
  Pending& p = it->second;
  if (!p.displayed_at_ms) {
    throw ProtocolError("suggestion " + request_id + " was never displayed");
  }
  const double now = clock_->now_ms();
  const SuggestionKind kind = p.suggestion.kind;
  emit(TelemetryKind::kDisplayed, request_id, p.uri, kind, p.chars,
       p.latency_ms, now - *p.displayed_at_ms);
  emit(TelemetryKind::kAccepted, request_id, p.uri, kind, p.chars,
       p.latency_ms);
  const Position end = end_of_insertion(p.suggestion.insert_at, p.suggestion.text);
  pending_.erase(it);
  retire_locked(request_id, "accepted");
  return end;
}

bool CompletionEngine::reject_suggestion(const std::string& request_id) {
  std::lock_guard lock(mu_);
  const auto it = pending_.find(request_id);
  if (it == pending_.end()) return false;
  settle_pending_locked(request_id, it->second, true);
  pending_.erase(it);
  retire_locked(request_id, "rejected");
  return true;
}

void CompletionEngine::record_typed(const std::string& uri, std::size_t chars) {
  std::lock_guard lock(mu_);
  emit(TelemetryKind::kTyped, {}, uri, std::nullopt, chars);
}

void CompletionEngine::shutdown() {
  std::lock_guard lock(mu_);
  for (auto& [uri, state] : docs_) {
    if (state.active) cancel_job_locked(*state.active);
  }
  for (auto& [id, p] : pending_) {
    settle_pending_locked(id, p, false);
    retire_locked(id, "shutdown");
  }
  pending_.clear();
  if (telemetry_) telemetry_->flush();
}

std::size_t CompletionEngine::pending_suggestions() const {
  std::lock_guard lock(mu_);
  return pending_.size();
}

CompletionEngine::DocState& CompletionEngine::doc_state(const std::string& uri) {
  const auto it = docs_.find(uri);
  if (it == docs_.end() || it->second.closed) throw ProtocolError("unknown document: " + uri);
  return it->second;
}

std::shared_ptr<const ScopeTree> CompletionEngine::tree_for(DocState& state) {
  if (!state.tree || state.tree->doc_version != state.doc.version()) {
    state.tree = std::make_shared<const ScopeTree>(
        parse_document(state.doc, config_.trigger.scope));
  }
  return state.tree;
}

void CompletionEngine::invalidate_document_locked(DocState& state,
                                                  const std::string& uri) {
  if (state.active) {
    cancel_job_locked(*state.active);
    state.active.reset();
  }
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (it->second.uri != uri) {
      ++it;
      continue;
    }
    settle_pending_locked(it->first, it->second, true);
    retire_locked(it->first, "invalidated");
    it = pending_.erase(it);
  }
}

void CompletionEngine::cancel_job_locked(CompletionJob& job) {
  if (job.done_) return;
  job.cancelled_ = true;
  job.options_.cancel.cancel();
  // A job inside next() finishes itself when the chunk returns.
  if (!job.in_step_) {
    finish_job_locked(job, CompletionOutcome::kInvalidated, std::nullopt,
                      "cancelled");
  }
  backend_released_.notify_all();
}

void CompletionEngine::settle_pending_locked(const std::string& request_id,
                                             Pending& p, bool rejected) {
  const SuggestionKind kind = p.suggestion.kind;
  if (!p.displayed_at_ms) {
    emit(TelemetryKind::kInvalidated, request_id, p.uri, kind, 0, p.latency_ms,
         std::nullopt, "not displayed");
    return;
  }
  emit(TelemetryKind::kDisplayed, request_id, p.uri, kind, p.chars,
       p.latency_ms, clock_->now_ms() - *p.displayed_at_ms);
  if (rejected) {
    emit(TelemetryKind::kRejected, request_id, p.uri, kind, p.chars,
         p.latency_ms);
  }
}

void CompletionEngine::retire_locked(const std::string& request_id,
                                     std::string reason) {
  if (retired_.size() >= kRetiredLimit) {
    retired_.erase(retired_order_.front());
    retired_order_.pop_front();
  }
  if (retired_.insert_or_assign(request_id, std::move(reason)).second) {
    retired_order_.push_back(request_id);
  }
}

void CompletionEngine::emit(TelemetryKind kind, const std::string& request_id,
                            const std::string& uri,
                            std::optional<SuggestionKind> suggestion_kind,
                            std::size_t chars, std::optional<double> latency_ms,
                            std::optional<double> display_ms,
                            std::string detail) {
  if (!telemetry_) return;
  TelemetryEvent e;
  e.kind = kind;
  e.request_id = request_id;
  e.uri = uri;
  e.suggestion_kind = suggestion_kind;
  e.ts_ms = clock_->now_ms();
  e.display_ms = display_ms;
  e.latency_ms = latency_ms;
  e.chars = chars;
  e.user_id = config_.user_id;
  e.detail = std::move(detail);
  telemetry_->record(e);
}

std::shared_ptr<ModelBackend> make_backend(const ServerConfig& config,
                                           std::shared_ptr<Clock> clock) {
  if (config.backend.kind == BackendConfig::Kind::kHttp) {
    return std::make_shared<HttpBackend>(config.backend.http, std::move(clock));
  }
  auto corpus = std::make_shared<MockCorpus>();
  if (!config.backend.corpus_path.empty()) {
    *corpus = MockCorpus::load_file(config.backend.corpus_path);
  }
  return std::make_shared<MockBackend>(std::move(corpus), config.backend.mock,
                                       std::move(clock));
}

std::shared_ptr<TelemetrySink> make_telemetry_sink(const ServerConfig& config) {
  if (config.telemetry_path.empty()) return nullptr;
  return std::make_shared<JsonlTelemetrySink>(config.telemetry_path);
}

}  // namespace scopecomplete
