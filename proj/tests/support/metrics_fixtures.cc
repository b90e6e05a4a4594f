#include "support/metrics_fixtures.h"

#include "scopecomplete/clock.h"
#include "scopecomplete/engine.h"
#include "scopecomplete/text.h"

namespace scopecomplete::fixtures {
namespace {

TelemetryEvent ev(TelemetryKind kind, std::string id,
                  std::optional<SuggestionKind> sk = std::nullopt) {
  TelemetryEvent e;
  e.kind = kind;
  e.request_id = std::move(id);
  e.uri = "file:///fixture.py";
  e.suggestion_kind = sk;
  e.user_id = "u1";
  return e;
}

TelemetryEvent displayed(std::string id, SuggestionKind sk, double display_ms,
                         double latency_ms, std::size_t chars) {
  TelemetryEvent e = ev(TelemetryKind::kDisplayed, std::move(id), sk);
  e.display_ms = display_ms;
  e.latency_ms = latency_ms;
  e.chars = chars;
  return e;
}

TelemetryEvent accepted(std::string id, SuggestionKind sk, std::size_t chars) {
  TelemetryEvent e = ev(TelemetryKind::kAccepted, std::move(id), sk);
  e.chars = chars;
  return e;
}

std::size_t code_point_bytes(unsigned char lead) {
  if (lead >= 0xF0) return 4;
  if (lead >= 0xE0) return 3;
  if (lead >= 0xC0) return 2;
  return 1;
}

}  // namespace

std::vector<TelemetryEvent> twenty_event_fixture() {
  constexpr auto S = SuggestionKind::kSingleLine;
  constexpr auto M = SuggestionKind::kMultiLine;
  std::vector<TelemetryEvent> v;
  v.push_back(ev(TelemetryKind::kRequested, "r1", S));
  v.push_back(displayed("r1", S, 1000, 200, 10));
  v.push_back(accepted("r1", S, 10));
  v.push_back(ev(TelemetryKind::kRequested, "r2", M));
  v.push_back(displayed("r2", M, 900, 800, 40));
  v.push_back(accepted("r2", M, 40));
  v.push_back(ev(TelemetryKind::kRequested, "r3", S));
  v.push_back(displayed("r3", S, 750, 250, 8));
  v.push_back(accepted("r3", S, 8));
  v.push_back(ev(TelemetryKind::kRequested, "r4", M));
  v.push_back(displayed("r4", M, 2000, 1200, 60));
  v.push_back(ev(TelemetryKind::kRejected, "r4", M));
  v.push_back(ev(TelemetryKind::kRequested, "r5", S));
  v.push_back(ev(TelemetryKind::kInvalidated, "r5", S));
  v.push_back(ev(TelemetryKind::kRequested, "r6", M));
  TelemetryEvent timed_out = ev(TelemetryKind::kTimedOut, "r6", M);
  timed_out.latency_ms = 2800;
  v.push_back(timed_out);
  v.push_back(ev(TelemetryKind::kRequested, "r7"));
  TelemetryEvent empty = ev(TelemetryKind::kEmpty, "r7");
  empty.detail = "suppressed";
  v.push_back(empty);
  TelemetryEvent typed = ev(TelemetryKind::kTyped, "");
  typed.chars = 100;
  v.push_back(typed);
  typed.chars = 42;
  v.push_back(typed);
  return v;
}

std::vector<TelemetryEvent> acceptance_rate_fixture() {
  std::vector<TelemetryEvent> v;
  for (int i = 0; i < 100; ++i) {
    const std::string id = "long" + std::to_string(i);
    v.push_back(ev(TelemetryKind::kRequested, id, SuggestionKind::kSingleLine));
    v.push_back(displayed(id, SuggestionKind::kSingleLine, 800, 300, 12));
    if (i < 29) {
      v.push_back(accepted(id, SuggestionKind::kSingleLine, 12));
    } else {
      v.push_back(ev(TelemetryKind::kRejected, id, SuggestionKind::kSingleLine));
    }
  }
  for (int i = 0; i < 20; ++i) {
    const std::string id = "short" + std::to_string(i);
    v.push_back(ev(TelemetryKind::kRequested, id, SuggestionKind::kSingleLine));
    v.push_back(displayed(id, SuggestionKind::kSingleLine, 500, 300, 12));
    v.push_back(accepted(id, SuggestionKind::kSingleLine, 12));
  }
  return v;
}

std::vector<TelemetryEvent> display_share_fixture() {
  std::vector<TelemetryEvent> v;
  for (int i = 0; i < 84; ++i) {
    const std::string id = "s" + std::to_string(i);
    v.push_back(displayed(id, SuggestionKind::kSingleLine, 1000, 300, 10));
    if (i < 58) v.push_back(accepted(id, SuggestionKind::kSingleLine, 10));
  }
  for (int i = 0; i < 16; ++i) {
    const std::string id = "m" + std::to_string(i);
    v.push_back(displayed(id, SuggestionKind::kMultiLine, 1000, 700, 60));
    if (i < 7) v.push_back(accepted(id, SuggestionKind::kMultiLine, 60));
  }
  return v;
}

MockCorpus perfect_corpus(const std::string& text) {
  MockCorpus corpus;
  for (std::size_t pos = 0; pos < text.size();) {
    pos += code_point_bytes(static_cast<unsigned char>(text[pos]));
    if (pos < text.size()) corpus.add(text.substr(0, pos), text.substr(pos));
  }
  return corpus;
}

long long greedy_walk_accepted(const std::string& uri, const std::string& language_id,
                               const std::string& ground_truth,
                               std::shared_ptr<const MockCorpus> corpus,
                               const ServerConfig& config) {
  ServerConfig c = config;
  c.telemetry_path.clear();
  auto clock = std::make_shared<ManualClock>();
  auto backend = std::make_shared<MockBackend>(std::move(corpus), c.backend.mock, clock);
  CompletionEngine engine(c, backend, std::make_shared<MemoryTelemetrySink>());

  long long taken = 0;
  int n = 0;
  std::size_t pos =
      ground_truth.empty() ? 0 : code_point_bytes(static_cast<unsigned char>(ground_truth[0]));
  while (pos < ground_truth.size()) {
    const std::string doc_uri = uri + "@" + std::to_string(n++);
    engine.open_document(doc_uri, language_id, 1, ground_truth.substr(0, pos));
    CompletionRequest r;
    r.request_id = doc_uri;
    r.uri = doc_uri;
    r.version = 1;
    r.cursor = engine.document(doc_uri)->end_position();
    const CompletionResponse response = engine.handle_inline_completion(std::move(r));
    engine.close_document(doc_uri);
    const std::string_view rest = std::string_view(ground_truth).substr(pos);
    if (response.suggestion && !response.suggestion->text.empty() &&
        rest.substr(0, response.suggestion->text.size()) == response.suggestion->text) {
      taken += static_cast<long long>(text::code_point_count(response.suggestion->text));
      pos += response.suggestion->text.size();
    } else {
      pos += code_point_bytes(static_cast<unsigned char>(ground_truth[pos]));
    }
  }
  return taken;
}

}  // namespace scopecomplete::fixtures
