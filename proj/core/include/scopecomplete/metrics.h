#ifndef SCOPECOMPLETE_METRICS_H_
#define SCOPECOMPLETE_METRICS_H_

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "scopecomplete/telemetry.h"

namespace scopecomplete {

// Displays shorter than this are flicker: they count as displayed but not
// towards the acceptance rate.
inline constexpr double kDwellThresholdMs = 750;

struct KindMetrics {
  int requested = 0;
  int displayed = 0;
  int displayed_over_dwell = 0;
  int accepted = 0;
  int accepted_over_dwell = 0;
  int rejected = 0;
  int invalidated = 0;
  int timed_out = 0;
  int empty = 0;
  // accepted_over_dwell / displayed_over_dwell.
  double acceptance_rate = 0;
  long long chars_accepted = 0;
  // chars_accepted / (all chars accepted + chars typed), so the kinds add up
  // to the total.
  double percent_keystrokes_saved = 0;
  double share_of_displays = 0;
  double share_of_accepted_chars = 0;
  // Request to response, over requests that reached a terminal event with a
  // latency.
  double latency_p50_ms = 0;
  double latency_p90_ms = 0;
  double latency_p99_ms = 0;
};

struct MetricsReport {
  KindMetrics single_line;
  KindMetrics multi_line;
  // Includes requests that never got a kind (suppressed, stale).
  KindMetrics total;
  long long chars_typed = 0;
  int events = 0;
  int malformed_records = 0;
  std::vector<std::string> diagnostics;
  std::map<std::string, long long> chars_accepted_by_user;
};

MetricsReport aggregate(const std::vector<TelemetryEvent>& events);
// Line-delimited telemetry; malformed lines are counted, skipped and named in
// the diagnostics.
MetricsReport aggregate_jsonl(std::istream& in);
std::vector<TelemetryEvent> read_telemetry(std::istream& in, int* malformed,
                                           std::vector<std::string>* diagnostics);

std::string metrics_report_to_json(const MetricsReport& report);

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_METRICS_H_
