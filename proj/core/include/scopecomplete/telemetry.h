#ifndef SCOPECOMPLETE_TELEMETRY_H_
#define SCOPECOMPLETE_TELEMETRY_H_

#include <cstddef>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "scopecomplete/generation_params.h"

namespace scopecomplete {

// Lifecycle of one completion request. A Requested event is followed by
// exactly one terminal event: Displayed, Invalidated, TimedOut or Empty
// (suppressed, failed or emptied by post-processing). Accepted and Rejected
// follow a Displayed event. Typed records characters entered by hand and
// has no request.
enum class TelemetryKind {
  kRequested,
  kDisplayed,
  kAccepted,
  kRejected,
  kInvalidated,
  kTimedOut,
  kEmpty,
  kTyped,
};

std::string_view to_string(TelemetryKind kind);
std::optional<TelemetryKind> telemetry_kind_from(std::string_view name);
std::optional<SuggestionKind> suggestion_kind_from(std::string_view name);

struct TelemetryEvent {
  TelemetryKind kind = TelemetryKind::kRequested;
  std::string request_id;
  std::string uri;
  std::optional<SuggestionKind> suggestion_kind;
  double ts_ms = 0;
  // Displayed: time the suggestion stayed visible.
  std::optional<double> display_ms;
  // Time from request to response.
  std::optional<double> latency_ms;
  // Suggestion length in code points (Typed: characters typed).
  std::size_t chars = 0;
  std::string user_id;
  std::string detail;

  friend bool operator==(const TelemetryEvent&, const TelemetryEvent&) = default;
};

class TelemetryParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One JSON object per line. Field names: event, request_id, uri, kind, ts_ms,
// display_ms, latency_ms, chars, user_id, detail.
std::string to_json_line(const TelemetryEvent& event);
TelemetryEvent parse_telemetry_line(std::string_view line);

class TelemetrySink {
 public:
  virtual ~TelemetrySink() = default;
  virtual void record(const TelemetryEvent& event) = 0;
  virtual void flush() {}
};

class MemoryTelemetrySink : public TelemetrySink {
 public:
  void record(const TelemetryEvent& event) override;
  std::vector<TelemetryEvent> events() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<TelemetryEvent> events_;
};

// Appends to a file.
class JsonlTelemetrySink : public TelemetrySink {
 public:
  explicit JsonlTelemetrySink(const std::string& path);
  void record(const TelemetryEvent& event) override;
  void flush() override;

 private:
  std::mutex mu_;
  std::ofstream out_;
};

// Forwards to several sinks.
class TeeTelemetrySink : public TelemetrySink {
 public:
  explicit TeeTelemetrySink(std::vector<std::shared_ptr<TelemetrySink>> sinks)
      : sinks_(std::move(sinks)) {}
  void record(const TelemetryEvent& event) override {
    for (auto& s : sinks_) s->record(event);
  }
  void flush() override {
    for (auto& s : sinks_) s->flush();
  }

 private:
  std::vector<std::shared_ptr<TelemetrySink>> sinks_;
};

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_TELEMETRY_H_
