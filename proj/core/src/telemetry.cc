#include "scopecomplete/telemetry.h"

#include <array>
#include <utility>

#include "json.hpp"

namespace scopecomplete {
namespace {

using json = nlohmann::json;

constexpr std::array<std::pair<TelemetryKind, std::string_view>, 8> kNames = {{
    {TelemetryKind::kRequested, "requested"},
    {TelemetryKind::kDisplayed, "displayed"},
    {TelemetryKind::kAccepted, "accepted"},
    {TelemetryKind::kRejected, "rejected"},
    {TelemetryKind::kInvalidated, "invalidated"},
    {TelemetryKind::kTimedOut, "timed_out"},
    {TelemetryKind::kEmpty, "empty"},
    {TelemetryKind::kTyped, "typed"},
}};

}  // namespace

std::string_view to_string(TelemetryKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "requested";
}

std::optional<TelemetryKind> telemetry_kind_from(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::optional<SuggestionKind> suggestion_kind_from(std::string_view name) {
  if (name == "single_line") return SuggestionKind::kSingleLine;
  if (name == "multi_line") return SuggestionKind::kMultiLine;
  return std::nullopt;
}

std::string to_json_line(const TelemetryEvent& e) {
  json j;
  j["event"] = to_string(e.kind);
  j["request_id"] = e.request_id;
  j["uri"] = e.uri;
  j["kind"] = e.suggestion_kind ? json(to_string(*e.suggestion_kind)) : json();
  j["ts_ms"] = e.ts_ms;
  if (e.display_ms) j["display_ms"] = *e.display_ms;
  if (e.latency_ms) j["latency_ms"] = *e.latency_ms;
  j["chars"] = e.chars;
  if (!e.user_id.empty()) j["user_id"] = e.user_id;
  if (!e.detail.empty()) j["detail"] = e.detail;
  return j.dump();
}

TelemetryEvent parse_telemetry_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error&) {
    throw TelemetryParseError("not a JSON object");
  }
  if (!j.is_object()) throw TelemetryParseError("not a JSON object");
  TelemetryEvent e;
  try {
    const auto kind = telemetry_kind_from(j.at("event").get<std::string>());
    if (!kind) throw TelemetryParseError("unknown event");
    e.kind = *kind;
    e.request_id = j.value("request_id", std::string());
    e.uri = j.value("uri", std::string());
    if (j.contains("kind") && !j["kind"].is_null()) {
      e.suggestion_kind = suggestion_kind_from(j["kind"].get<std::string>());
      if (!e.suggestion_kind) throw TelemetryParseError("unknown kind");
    }
    e.ts_ms = j.value("ts_ms", 0.0);
    if (j.contains("display_ms")) e.display_ms = j["display_ms"].get<double>();
    if (j.contains("latency_ms")) e.latency_ms = j["latency_ms"].get<double>();
    const auto chars = j.value("chars", static_cast<long long>(0));
    if (chars < 0) throw TelemetryParseError("negative chars");
    e.chars = static_cast<std::size_t>(chars);
    e.user_id = j.value("user_id", std::string());
    e.detail = j.value("detail", std::string());
  } catch (const json::exception& ex) {
    throw TelemetryParseError(std::string("bad field: ") + ex.what());
  }
  if (e.kind != TelemetryKind::kTyped && e.request_id.empty()) {
    throw TelemetryParseError("missing request_id");
  }
  return e;
}

void MemoryTelemetrySink::record(const TelemetryEvent& event) {
  std::lock_guard lock(mu_);
  events_.push_back(event);
}

std::vector<TelemetryEvent> MemoryTelemetrySink::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

void MemoryTelemetrySink::clear() {
  std::lock_guard lock(mu_);
  events_.clear();
}

JsonlTelemetrySink::JsonlTelemetrySink(const std::string& path)
    : out_(path, std::ios::app) {
  if (!out_) throw std::runtime_error("cannot open telemetry sink " + path);
}

void JsonlTelemetrySink::record(const TelemetryEvent& event) {
  std::lock_guard lock(mu_);
  out_ << to_json_line(event) << '\n';
}

void JsonlTelemetrySink::flush() {
  std::lock_guard lock(mu_);
  out_.flush();
}

}  // namespace scopecomplete
