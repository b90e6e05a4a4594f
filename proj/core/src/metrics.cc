#include "scopecomplete/metrics.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace scopecomplete {
namespace {

using json = nlohmann::json;

constexpr std::size_t kMaxDiagnostics = 50;

double nearest_rank(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0;
  const auto rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

double ratio(double num, double den) { return den > 0 ? num / den : 0; }

bool is_terminal(TelemetryKind k) {
  return k == TelemetryKind::kDisplayed || k == TelemetryKind::kInvalidated ||
         k == TelemetryKind::kTimedOut || k == TelemetryKind::kEmpty;
}

void note(MetricsReport& r, std::string message) {
  if (r.diagnostics.size() < kMaxDiagnostics) r.diagnostics.push_back(std::move(message));
}

}  // namespace

MetricsReport aggregate(const std::vector<TelemetryEvent>& events) {
  MetricsReport r;
  r.events = static_cast<int>(events.size());

  std::unordered_map<std::string, double> display_ms;
  for (const TelemetryEvent& e : events) {
    if (e.kind == TelemetryKind::kDisplayed && e.display_ms) {
      display_ms.emplace(e.request_id, *e.display_ms);
    }
  }

  std::vector<double> lat_single, lat_multi, lat_total;
  std::unordered_set<std::string> timed;
  for (const TelemetryEvent& e : events) {
    KindMetrics* kind = nullptr;
    if (e.suggestion_kind) {
      kind = *e.suggestion_kind == SuggestionKind::kMultiLine ? &r.multi_line
                                                              : &r.single_line;
    }
    auto bump = [&](int KindMetrics::*field) {
      ++(r.total.*field);
      if (kind) ++(kind->*field);
    };
    switch (e.kind) {
      case TelemetryKind::kRequested:
        bump(&KindMetrics::requested);
        break;
      case TelemetryKind::kDisplayed:
        bump(&KindMetrics::displayed);
        if (e.display_ms && *e.display_ms > kDwellThresholdMs) {
          bump(&KindMetrics::displayed_over_dwell);
        }
        break;
      case TelemetryKind::kAccepted: {
        bump(&KindMetrics::accepted);
        const auto it = display_ms.find(e.request_id);
        if (it == display_ms.end()) {
          note(r, "accepted without display: " + e.request_id);
        } else if (it->second > kDwellThresholdMs) {
          bump(&KindMetrics::accepted_over_dwell);
        }
        const auto chars = static_cast<long long>(e.chars);
        r.total.chars_accepted += chars;
        if (kind) kind->chars_accepted += chars;
        if (!e.user_id.empty()) r.chars_accepted_by_user[e.user_id] += chars;
        break;
      }
      case TelemetryKind::kRejected:
        bump(&KindMetrics::rejected);
        break;
      case TelemetryKind::kInvalidated:
        bump(&KindMetrics::invalidated);
        break;
      case TelemetryKind::kTimedOut:
        bump(&KindMetrics::timed_out);
        break;
      case TelemetryKind::kEmpty:
        bump(&KindMetrics::empty);
        break;
      case TelemetryKind::kTyped:
        r.chars_typed += static_cast<long long>(e.chars);
        break;
    }
    if (is_terminal(e.kind) && e.latency_ms && timed.insert(e.request_id).second) {
      lat_total.push_back(*e.latency_ms);
      if (kind) {
        (kind == &r.multi_line ? lat_multi : lat_single).push_back(*e.latency_ms);
      }
    }
  }

  const double entered = static_cast<double>(r.total.chars_accepted + r.chars_typed);
  auto finish = [&](KindMetrics& k, std::vector<double>& lat) {
    k.acceptance_rate = ratio(k.accepted_over_dwell, k.displayed_over_dwell);
    k.percent_keystrokes_saved = ratio(static_cast<double>(k.chars_accepted), entered);
    k.share_of_displays = ratio(k.displayed, r.total.displayed);
    k.share_of_accepted_chars = ratio(static_cast<double>(k.chars_accepted),
                                      static_cast<double>(r.total.chars_accepted));
    std::sort(lat.begin(), lat.end());
    k.latency_p50_ms = nearest_rank(lat, 0.50);
    k.latency_p90_ms = nearest_rank(lat, 0.90);
    k.latency_p99_ms = nearest_rank(lat, 0.99);
  };
  finish(r.single_line, lat_single);
  finish(r.multi_line, lat_multi);
  finish(r.total, lat_total);
  return r;
}

std::vector<TelemetryEvent> read_telemetry(std::istream& in, int* malformed,
                                           std::vector<std::string>* diagnostics) {
  std::vector<TelemetryEvent> events;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      events.push_back(parse_telemetry_line(line));
    } catch (const TelemetryParseError& e) {
      if (malformed) ++*malformed;
      if (diagnostics && diagnostics->size() < kMaxDiagnostics) {
        diagnostics->push_back("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  return events;
}

MetricsReport aggregate_jsonl(std::istream& in) {
  int malformed = 0;
  std::vector<std::string> diagnostics;
  const auto events = read_telemetry(in, &malformed, &diagnostics);
  MetricsReport r = aggregate(events);
  r.malformed_records = malformed;
  diagnostics.insert(diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
  r.diagnostics = std::move(diagnostics);
  return r;
}

std::string metrics_report_to_json(const MetricsReport& report) {
  auto kind = [](const KindMetrics& k) {
    return json{{"requested", k.requested},
                {"displayed", k.displayed},
                {"displayed_over_dwell", k.displayed_over_dwell},
                {"accepted", k.accepted},
                {"accepted_over_dwell", k.accepted_over_dwell},
                {"rejected", k.rejected},
                {"invalidated", k.invalidated},
                {"timed_out", k.timed_out},
                {"empty", k.empty},
                {"acceptance_rate", k.acceptance_rate},
                {"chars_accepted", k.chars_accepted},
                {"percent_keystrokes_saved", k.percent_keystrokes_saved},
                {"share_of_displays", k.share_of_displays},
                {"share_of_accepted_chars", k.share_of_accepted_chars},
                {"latency_p50_ms", k.latency_p50_ms},
                {"latency_p90_ms", k.latency_p90_ms},
                {"latency_p99_ms", k.latency_p99_ms}};
  };
  json j = {{"single_line", kind(report.single_line)},
            {"multi_line", kind(report.multi_line)},
            {"total", kind(report.total)},
            {"chars_typed", report.chars_typed},
            {"events", report.events},
            {"malformed_records", report.malformed_records},
            {"diagnostics", report.diagnostics},
            {"chars_accepted_by_user", report.chars_accepted_by_user}};
  return j.dump(2);
}

}  // namespace scopecomplete
