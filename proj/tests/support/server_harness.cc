#include "support/server_harness.h"

#include <random>
#include <thread>

#include "scopecomplete/text.h"
#include "support/program_gen.h"

namespace scopecomplete::harness {

ContinuationSource hashed_source() {
  return [](const FimPrompt& prompt) {
    const std::uint64_t h = text::fnv1a(prompt.suffix, text::fnv1a(prompt.prefix));
    std::mt19937 rng(static_cast<std::uint32_t>(h ^ (h >> 32)) +
                     (prompt.multi_line ? 1u : 0u));
    return gen::model_output(rng, prompt.family);
  };
}

class WatchedStream : public GenerationStream {
 public:
  WatchedStream(std::unique_ptr<GenerationStream> inner, CancellationToken cancel,
                WatchingBackend* owner, LanguageFamily family)
      : inner_(std::move(inner)),
        cancel_(std::move(cancel)),
        owner_(owner),
        family_(family) {
    owner_->opened(family_);
  }
  ~WatchedStream() override { owner_->closed(family_); }

  std::optional<std::string> next() override {
    const bool cancelled_before = cancel_.cancelled();
    auto chunk = inner_->next();
    if (chunk && cancelled_before) owner_->late_chunk();
    return chunk;
  }
  StreamStatus status() const override { return inner_->status(); }
  std::string diagnostic() const override { return inner_->diagnostic(); }

 private:
  std::unique_ptr<GenerationStream> inner_;
  CancellationToken cancel_;
  WatchingBackend* owner_;
  LanguageFamily family_;
};

WatchingBackend::WatchingBackend(std::shared_ptr<ModelBackend> inner)
    : inner_(std::move(inner)) {}

std::unique_ptr<GenerationStream> WatchingBackend::generate(
    const FimPrompt& prompt, const GenerationParams& params,
    const GenerateOptions& options) {
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  return std::make_unique<WatchedStream>(
      inner_->generate(prompt, params, options), options.cancel, this,
      prompt.family);
}

void WatchingBackend::opened(LanguageFamily family) {
  std::lock_guard lock(mu_);
  const int n = ++open_[family];
  max_open_[family] = std::max(max_open_[family], n);
}

void WatchingBackend::closed(LanguageFamily family) {
  std::lock_guard lock(mu_);
  --open_[family];
}

void WatchingBackend::late_chunk() {
  std::lock_guard lock(mu_);
  ++chunks_after_cancel_;
}

int WatchingBackend::max_open(LanguageFamily family) const {
  std::lock_guard lock(mu_);
  const auto it = max_open_.find(family);
  return it == max_open_.end() ? 0 : it->second;
}

int WatchingBackend::open(LanguageFamily family) const {
  std::lock_guard lock(mu_);
  const auto it = open_.find(family);
  return it == open_.end() ? 0 : it->second;
}

int WatchingBackend::chunks_after_cancel() const {
  std::lock_guard lock(mu_);
  return chunks_after_cancel_;
}

int WatchingBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

NotificationHandler NoticeLog::handler() {
  return [this](const FetchingMultilineNotice& n) {
    std::lock_guard lock(mu_);
    notices_.push_back(n);
  };
}

std::vector<FetchingMultilineNotice> NoticeLog::notices() const {
  std::lock_guard lock(mu_);
  return notices_;
}

std::vector<std::string> check_indicator_pairing(
    const std::vector<FetchingMultilineNotice>& notices, bool all_closed) {
  std::vector<std::string> out;
  std::map<std::string, int> state;  // 1 = started, 2 = finished
  for (const auto& n : notices) {
    int& s = state[n.request_id];
    if (n.started) {
      if (s != 0) out.push_back("started twice: " + n.request_id);
      s = 1;
    } else {
      if (s != 1) out.push_back("finished without started: " + n.request_id);
      s = 2;
    }
  }
  if (all_closed) {
    for (const auto& [id, s] : state) {
      if (s == 1) out.push_back("never finished: " + id);
    }
  }
  return out;
}

std::vector<std::string> check_telemetry_completeness(
    const std::vector<TelemetryEvent>& events) {
  std::vector<std::string> out;
  struct Life {
    int terminal = 0;
    bool displayed = false;
    int follow_ups = 0;
  };
  std::map<std::string, Life> lives;
  for (const auto& e : events) {
    if (e.kind == TelemetryKind::kTyped) continue;
    if (e.kind == TelemetryKind::kRequested) {
      if (lives.count(e.request_id) != 0) {
        out.push_back("requested twice: " + e.request_id);
      }
      lives[e.request_id];
      continue;
    }
    const auto it = lives.find(e.request_id);
    if (it == lives.end()) {
      out.push_back(std::string(to_string(e.kind)) + " before requested: " +
                    e.request_id);
      continue;
    }
    Life& life = it->second;
    switch (e.kind) {
      case TelemetryKind::kDisplayed:
        life.displayed = true;
        [[fallthrough]];
      case TelemetryKind::kInvalidated:
      case TelemetryKind::kTimedOut:
      case TelemetryKind::kEmpty:
        if (++life.terminal > 1) {
          out.push_back("second terminal event for " + e.request_id);
        }
        break;
      case TelemetryKind::kAccepted:
      case TelemetryKind::kRejected:
        if (!life.displayed) {
          out.push_back("follow-up without display: " + e.request_id);
        }
        if (++life.follow_ups > 1) {
          out.push_back("second follow-up for " + e.request_id);
        }
        break;
      default:
        break;
    }
  }
  for (const auto& [id, life] : lives) {
    if (life.terminal == 0) out.push_back("no terminal event for " + id);
  }
  return out;
}

namespace {

struct Track {
  std::shared_ptr<CompletionJob> job;
  bool superseded = false;
  bool pending = false;
  bool displayed = false;
  bool invalidated_suggestion = false;
  bool observed = false;
};

// Records the outcome the first time the job is seen finished.
void observe(Track& t) {
  if (t.observed || !t.job->done()) return;
  t.observed = true;
  t.pending = t.job->response().suggestion.has_value();
}

struct DocSlot {
  std::string uri;
  std::string language;
  LanguageFamily family;
  std::int64_t version = 1;
  std::shared_ptr<Track> track;
};

std::string fresh_text(std::mt19937& rng, LanguageFamily family) {
  return family == LanguageFamily::kIndentScoped
             ? gen::join_lines(gen::indent_program(rng, 30))
             : gen::brace_program(rng, 30);
}

Cursor pick_cursor(std::mt19937& rng, const Document& doc) {
  if (gen::chance(rng, 0.6)) {
    const int line = gen::uniform(rng, 0, doc.line_count() - 1);
    return Cursor{line, doc.line_length(line)};
  }
  return gen::random_cursor(rng, doc);
}

// Marks the document's running request as superseded; after the
// invalidating call the engine must have settled it.
class Invalidation {
 public:
  Invalidation(DocSlot& slot, bool applies) {
    if (!applies || !slot.track) return;
    Track& t = *slot.track;
    observe(t);
    if (!t.job->done()) {
      t.superseded = true;
      running_ = slot.track;
    }
    if (t.pending) {
      t.pending = false;
      t.invalidated_suggestion = true;
    }
  }
  void verify(std::vector<std::string>& violations) const {
    if (running_ && !running_->job->done()) {
      violations.push_back("request " + running_->job->request_id() +
                           " still running after invalidation");
    }
  }

 private:
  std::shared_ptr<Track> running_;
};

void check_track(const Track& t, const std::vector<FetchingMultilineNotice>& notices,
                 InterleavingReport& report) {
  const CompletionResponse& r = t.job->response();
  if (t.superseded) {
    if (r.suggestion || r.outcome != CompletionOutcome::kInvalidated) {
      report.violations.push_back("superseded request " + r.request_id +
                                  " ended " + std::string(to_string(r.outcome)));
    }
  }
  if (r.suggestion.has_value() != (r.outcome == CompletionOutcome::kSuggested)) {
    report.violations.push_back("suggestion/outcome mismatch for " + r.request_id);
  }
  int started = 0;
  for (const auto& n : notices) {
    if (n.request_id == r.request_id && n.started) ++started;
  }
  const bool expect_started = r.decision.kind() == TriggerKind::kMultiLine &&
                              !r.served_from_cache;
  if (started != (expect_started ? 1 : 0)) {
    report.violations.push_back("unexpected indicator count for " + r.request_id);
  }
  ++report.requests;
  if (r.suggestion) ++report.suggestions;
  if (r.served_from_cache) ++report.cache_hits;
  if (r.outcome == CompletionOutcome::kInvalidated) ++report.invalidated;
  if (r.outcome == CompletionOutcome::kTimedOut) ++report.timed_out;
}

void append(std::vector<std::string>& into, const std::vector<std::string>& v) {
  into.insert(into.end(), v.begin(), v.end());
}

}  // namespace

InterleavingReport run_interleaving(std::uint64_t seed, int events) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed * 2654435761u + 17));
  InterleavingReport report;
  auto clock = std::make_shared<ManualClock>(0);
  MockConfig mock;
  mock.chunk_code_points = gen::uniform(rng, 1, 12);
  mock.first_chunk_ms = gen::uniform(rng, 0, 400);
  mock.per_token_ms = gen::uniform(rng, 0, 30);
  auto watch = std::make_shared<WatchingBackend>(
      std::make_shared<MockBackend>(hashed_source(), mock, clock));
  ServerConfig config;
  config.invalidate_on_cursor_move = gen::chance(rng, 0.7);
  config.cache_capacity = gen::chance(rng, 0.3) ? 2 : 512;
  config.cache_ttl_ms = gen::chance(rng, 0.3) ? 2000 : 300000;
  auto sink = std::make_shared<MemoryTelemetrySink>();
  NoticeLog log;
  CompletionEngine engine(config, watch, sink, log.handler());

  std::vector<DocSlot> docs = {
      {"file:///a.py", "python", LanguageFamily::kIndentScoped},
      {"file:///b.cc", "cpp", LanguageFamily::kBraceScoped},
  };
  for (DocSlot& d : docs) {
    engine.open_document(d.uri, d.language, d.version, fresh_text(rng, d.family));
  }
  std::vector<std::shared_ptr<Track>> all;
  auto& violations = report.violations;

  auto apply_edit = [&](DocSlot& d, const TextEdit& edit) {
    Invalidation inv(d, true);
    engine.apply_document_edit(d.uri, ++d.version, {edit});
    inv.verify(violations);
  };

  for (int step = 0; step < events; ++step) {
    DocSlot& d = docs[gen::uniform(rng, 0, 1)];
    const Document doc = *engine.document(d.uri);
    const int roll = gen::uniform(rng, 0, 99);
    Track* t = d.track.get();
    if (roll < 20) {
      CompletionRequest req;
      req.uri = d.uri;
      req.version = gen::chance(rng, 0.05) ? d.version - 1 : d.version;
      req.cursor = pick_cursor(rng, doc);
      req.origin.explicit_shortcut = gen::chance(rng, 0.15);
      Invalidation inv(d, true);
      auto track = std::make_shared<Track>();
      track->job = engine.start_completion(req);
      inv.verify(violations);
      d.track = track;
      all.push_back(track);
      observe(*track);
    } else if (roll < 50) {
      if (t == nullptr) continue;
      for (int k = gen::uniform(rng, 1, 4); k > 0; --k) {
        if (t->job->step()) break;
      }
      observe(*t);
    } else if (roll < 60) {
      static constexpr const char* kTyped[] = {"a", "(", ":", "{", "}", "\n",
                                               " ", "x = 1", "\n    "};
      apply_edit(d, TextEdit::insertion(gen::random_cursor(rng, doc),
                                        kTyped[gen::uniform(rng, 0, 8)]));
    } else if (roll < 65) {
      Invalidation inv(d, config.invalidate_on_cursor_move);
      engine.cursor_moved(d.uri, gen::random_cursor(rng, doc));
      inv.verify(violations);
    } else if (roll < 75) {
      if (t == nullptr) continue;
      const bool shown = engine.suggestion_displayed(t->job->request_id());
      const bool expect = t->pending && !t->displayed;
      if (shown != expect) violations.push_back("display of " + t->job->request_id());
      if (shown) t->displayed = true;
    } else if (roll < 80) {
      if (t == nullptr || !t->job->done()) continue;
      const std::string id = t->job->request_id();
      try {
        const Position end = engine.accept_suggestion(id);
        if (!(t->pending && t->displayed)) {
          violations.push_back("accepted a suggestion that was not on screen: " + id);
          continue;
        }
        const Suggestion& s = *t->job->response().suggestion;
        if (end != end_of_insertion(s.insert_at, s.text)) {
          violations.push_back("accept geometry for " + id);
        }
        t->pending = false;
        ++report.accepted;
        apply_edit(d, TextEdit::insertion(s.insert_at, s.text));
      } catch (const SuggestionInvalidatedError&) {
        if (!t->invalidated_suggestion) {
          violations.push_back("spurious invalidation on accept: " + id);
        }
      } catch (const UnknownRequestError&) {
        if (t->pending || t->invalidated_suggestion) {
          violations.push_back("pending suggestion unknown on accept: " + id);
        }
      } catch (const ProtocolError&) {
        if (!t->pending || t->displayed) {
          violations.push_back("unexpected accept error for " + id);
        }
      }
    } else if (roll < 85) {
      if (t == nullptr) continue;
      const bool rejected = engine.reject_suggestion(t->job->request_id());
      if (rejected != t->pending) violations.push_back("reject of " + t->job->request_id());
      t->pending = false;
    } else if (roll < 95) {
      clock->advance(gen::uniform(rng, 0, 500));
    } else if (roll < 98) {
      if (t == nullptr) continue;
      t->job->run();
      observe(*t);
    } else {
      Invalidation inv(d, true);
      engine.close_document(d.uri);
      inv.verify(violations);
      d.version = 1;
      d.track.reset();
      engine.open_document(d.uri, d.language, d.version, fresh_text(rng, d.family));
    }
  }
  for (DocSlot& d : docs) {
    if (d.track && gen::chance(rng, 0.5)) d.track->job->run();
  }
  engine.shutdown();
  if (engine.pending_suggestions() != 0) violations.push_back("pending after shutdown");

  const auto notices = log.notices();
  for (const auto& track : all) {
    if (!track->job->done()) {
      violations.push_back("request " + track->job->request_id() +
                           " unfinished after shutdown");
      continue;
    }
    check_track(*track, notices, report);
  }
  for (LanguageFamily f : {LanguageFamily::kIndentScoped, LanguageFamily::kBraceScoped}) {
    if (watch->max_open(f) > 1) violations.push_back("two generations at once for one document");
    if (watch->open(f) != 0) violations.push_back("stream left open");
  }
  if (watch->chunks_after_cancel() != 0) {
    violations.push_back("chunk delivered after cancellation");
  }
  append(violations, check_indicator_pairing(notices, true));
  append(violations, check_telemetry_completeness(sink->events()));
  return report;
}

InterleavingReport run_threaded_interleaving(std::uint64_t seed, int events) {
  std::mt19937 rng(static_cast<std::uint32_t>(seed * 40503u + 3));
  InterleavingReport report;
  MockConfig mock;
  mock.chunk_code_points = gen::uniform(rng, 1, 8);
  mock.first_chunk_ms = gen::uniform(rng, 0, 3);
  mock.per_token_ms = 0.05 * gen::uniform(rng, 0, 4);
  auto watch = std::make_shared<WatchingBackend>(
      std::make_shared<MockBackend>(hashed_source(), mock, steady_clock()));
  ServerConfig config;
  auto sink = std::make_shared<MemoryTelemetrySink>();
  NoticeLog log;
  std::vector<std::thread> workers;
  std::vector<std::shared_ptr<CompletionJob>> jobs;
  {
    CompletionEngine engine(config, watch, sink, log.handler());
    std::vector<DocSlot> docs = {
        {"file:///a.py", "python", LanguageFamily::kIndentScoped},
        {"file:///b.cc", "cpp", LanguageFamily::kBraceScoped},
    };
    for (DocSlot& d : docs) {
      engine.open_document(d.uri, d.language, d.version, fresh_text(rng, d.family));
    }
    for (int step = 0; step < events; ++step) {
      DocSlot& d = docs[gen::uniform(rng, 0, 1)];
      const Document doc = *engine.document(d.uri);
      const int roll = gen::uniform(rng, 0, 9);
      if (roll < 4) {
        CompletionRequest req;
        req.uri = d.uri;
        req.version = d.version;
        req.cursor = pick_cursor(rng, doc);
        auto job = engine.start_completion(req);
        jobs.push_back(job);
        workers.emplace_back([job] { job->run(); });
      } else if (roll < 7) {
        engine.apply_document_edit(
            d.uri, ++d.version,
            {TextEdit::insertion(gen::random_cursor(rng, doc), "\n")});
      } else if (roll < 8) {
        if (!jobs.empty()) {
          const std::string id = jobs.back()->request_id();
          if (engine.suggestion_displayed(id) && gen::chance(rng, 0.5)) {
            engine.reject_suggestion(id);
          }
        }
      } else {
        std::this_thread::sleep_for(std::chrono::microseconds(gen::uniform(rng, 0, 800)));
      }
    }
    for (auto& w : workers) w.join();
    engine.shutdown();
    for (LanguageFamily f : {LanguageFamily::kIndentScoped, LanguageFamily::kBraceScoped}) {
      if (watch->max_open(f) > 1) {
        report.violations.push_back("two generations at once for one document");
      }
    }
  }
  if (watch->chunks_after_cancel() != 0) {
    report.violations.push_back("chunk delivered after cancellation");
  }
  const auto notices = log.notices();
  for (const auto& job : jobs) check_track(Track{job}, notices, report);
  append(report.violations, check_indicator_pairing(notices, true));
  append(report.violations, check_telemetry_completeness(sink->events()));
  return report;
}

}  // namespace scopecomplete::harness
