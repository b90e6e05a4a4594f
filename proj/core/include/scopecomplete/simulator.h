#ifndef SCOPECOMPLETE_SIMULATOR_H_
#define SCOPECOMPLETE_SIMULATOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scopecomplete/generation_params.h"

namespace scopecomplete {

// Characters per token of the default tokenizer on source code (measured on
// C++ and Python files; identifier runs are one token, whitespace is free).
inline constexpr double kDefaultCharsPerToken = 4.5;

struct SimRequest {
  int id = 0;
  SuggestionKind kind = SuggestionKind::kSingleLine;
  double arrival_ms = 0;
  int tokens_to_generate = 1;
  // Token count after which the client has everything up to the scope cut.
  std::optional<int> cancel_after_tokens;
  // Budget relative to arrival.
  double deadline_ms = 2000;
  // Length of the full generation in characters; informational.
  int chars = 0;
};

// Time to the first token and between tokens of one request, scaled by the
// size of the batch it runs in. Without an explicit curve the factor is 1 up
// to `flat_until_batch` and grows by `growth_per_step` per request beyond.
struct LatencyModel {
  double first_token_ms = 150;
  double per_token_ms = 19;
  int flat_until_batch = 8;
  double growth_per_step = 0.10;
  // factor for batch size b is batch_factor[b - 1]; the last entry extends.
  std::vector<double> batch_factor;

  double factor(int batch) const;
  double first_token_at(int batch) const { return first_token_ms * factor(batch); }
  double per_token_at(int batch) const { return per_token_ms * factor(batch); }
  // Throws ConfigError.
  void validate() const;
};

struct BatchConfig {
  int max_batch = 16;
  // Continuous: free slots are refilled as soon as a request leaves.
  // Static: a worker takes a new batch only once it is empty.
  bool continuous = true;
};

struct QosPolicy {
  enum class Mode { kFifo, kGestation };
  Mode mode = Mode::kFifo;
  // Extra tolerance before timeout, Gestation mode only.
  double single_line_gestation_ms = 0;
  double multi_line_gestation_ms = 150;
  // Gestation mode serves the queued request with the highest
  // weight * time waited. Equal weights keep arrival order.
  double single_line_weight = 1;
  double multi_line_weight = 1;

  void validate() const;
};

std::string_view to_string(QosPolicy::Mode mode);

struct SimOptions {
  int workers = 2;
  BatchConfig batch;
  QosPolicy qos;
  LatencyModel latency;
  bool streaming_cancel = true;

  void validate() const;
};

struct WorkloadMix {
  int count = 10000;
  double arrival_rate_per_s = 33;
  double multi_line_fraction = 0.16;
  // Log-normal generation lengths, characters.
  double multi_line_chars_p50 = 325;
  double multi_line_chars_p90 = 450;
  double single_line_chars_p50 = 36;
  double single_line_chars_p90 = 70;
  int single_line_max_tokens = 25;
  int multi_line_max_tokens = 120;
  double chars_per_token = kDefaultCharsPerToken;
  // Multi-line requests get a scope cut; the kept share of the generation is
  // Beta distributed with this mean.
  bool model_cancellation = true;
  double mean_kept_fraction = 0.46;
  double single_line_deadline_ms = 3000;
  double multi_line_deadline_ms = 3000;

  void validate() const;
};

// Poisson arrivals, deterministic for a seed.
std::vector<SimRequest> sample_workload(std::uint64_t seed, const WorkloadMix& mix);

struct KindReport {
  int requests = 0;
  int completed = 0;
  int cancelled = 0;
  int timed_out = 0;
  // Requests that returned a usable suggestion (not timed out).
  int served = 0;
  double timeout_rate = 0;
  // Round trip from arrival to the last token the client needed, or to the
  // timeout.
  double p50_ms = 0;
  double p90_ms = 0;
  double p99_ms = 0;
  double mean_queue_ms = 0;
  long long generated_tokens = 0;
  long long wasted_tokens = 0;
};

struct SimReport {
  KindReport single_line;
  KindReport multi_line;
  KindReport all;
  double makespan_ms = 0;
  // Tokens the clients needed, per second of simulated time.
  double useful_tokens_per_s = 0;
  double served_per_s = 0;
  int max_batch_seen = 0;
};

// Deterministic discrete-event run. Requests must be sorted by arrival.
// Throws ConfigError on invalid options or requests.
SimReport run_simulation(const std::vector<SimRequest>& workload,
                         const SimOptions& options);
SimReport run_simulation(const WorkloadMix& mix, std::uint64_t seed,
                         const SimOptions& options);

struct SimSetup {
  WorkloadMix workload;
  SimOptions options;
};

// JSON: {"workload": {...}, "workers": N, "batch": {...}, "qos": {...},
// "latency": {...}, "streaming_cancel": bool}. Unknown keys are rejected.
SimSetup parse_sim_setup(const std::string& json_text);
std::string sim_report_to_json(const SimReport& report);

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_SIMULATOR_H_
