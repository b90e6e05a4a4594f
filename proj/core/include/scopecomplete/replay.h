#ifndef SCOPECOMPLETE_REPLAY_H_
#define SCOPECOMPLETE_REPLAY_H_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scopecomplete/config.h"
#include "scopecomplete/document.h"
#include "scopecomplete/metrics.h"
#include "scopecomplete/mock_backend.h"
#include "scopecomplete/simulator.h"
#include "scopecomplete/telemetry.h"

namespace scopecomplete {

// Keystroke timing. Pauses are log-normal; the first character of a line
// follows a longer think pause.
struct PauseModel {
  double median_ms = 180;
  double sigma = 0.5;
  double think_pause_ms = 1500;

  void validate() const;
};

struct TypeChar {
  std::string ch;  // one code point
};
struct MoveCursor {
  Position to;
};
struct Pause {
  double ms = 0;
};
struct ExplicitTrigger {};

using SessionEvent = std::variant<TypeChar, MoveCursor, Pause, ExplicitTrigger>;

struct SessionScript {
  std::string uri;
  std::string language_id;
  std::string ground_truth;
  std::vector<SessionEvent> events;
};

// Pause + TypeChar for every code point of `ground_truth`.
SessionScript make_session_script(std::string uri, std::string language_id,
                                  std::string ground_truth, const PauseModel& pauses,
                                  std::uint64_t seed);

// Typing every TypeChar of the script at the running cursor, without
// completions.
std::string replay_typing_only(const SessionScript& script);

// Stands in for the user: a displayed suggestion is taken iff the document so
// far is a prefix of the ground truth, the cursor is at its end and the
// suggestion continues it exactly. Reading a suggestion before taking it
// costs a think pause.
struct AcceptOracle {
  static bool accepts(const Document& document, Cursor cursor,
                      std::string_view ground_truth, std::string_view suggestion);
};

struct ReplayOptions {
  // Replay always drives the mock backend: only its chunking and fallback
  // settings are used. An empty user_id becomes "replay".
  ServerConfig engine;
  PauseModel pauses;
  LatencyModel latency;
  // Multiplies both latency terms.
  double latency_scale = 1;

  void validate() const;
};

struct SessionMetrics {
  std::string uri;
  MetricsReport metrics;
  std::vector<TelemetryEvent> events;
  std::string final_text;
  bool matches_ground_truth = false;
  int keystrokes = 0;
  int requests = 0;
  double duration_ms = 0;
};

// Deterministic per (script, corpus, options). Request ids are prefixed with
// the uri, so events of several sessions can be aggregated together.
SessionMetrics replay_session(const SessionScript& script,
                              std::shared_ptr<const MockCorpus> corpus,
                              const ReplayOptions& options, std::uint64_t seed);

// Convenience: script from a ground-truth file, then replay.
SessionMetrics replay_session(const std::string& uri, const std::string& language_id,
                              const std::string& ground_truth,
                              std::shared_ptr<const MockCorpus> corpus,
                              const ReplayOptions& options, std::uint64_t seed);

MetricsReport aggregate(const std::vector<SessionMetrics>& sessions);

// "python" for .py, "cpp" for .cc/.cpp/.h/.hpp, ... or "" when unknown.
std::string language_for_path(const std::string& path);

struct GroundTruthFile {
  std::string name;  // relative to the ground-truth directory
  std::string language_id;
  std::string text;
};

// <dir>/ground_truth/* with a known extension, sorted by name.
std::vector<GroundTruthFile> load_ground_truth(const std::string& corpus_dir);

struct CorpusReplay {
  std::vector<SessionMetrics> sessions;
  MetricsReport report;
};

// Replays every ground-truth file against <dir>/mock_corpus.jsonl (an empty
// corpus when the file is missing). Session i uses seed + i.
CorpusReplay replay_corpus(const std::string& corpus_dir, const ReplayOptions& options,
                           std::uint64_t seed);

// Replay settings file: {"engine": {...server config...}, "pauses": {...},
// "latency": {...}, "latency_scale": x}. Unknown keys throw
// ConfigError.
ReplayOptions parse_replay_options(const std::string& json_text);

// Synthetic model for a ground-truth set. Knowledge is per line: a line is
// predicted from its first column, only once the user has typed a random
// prefix of it, or never. Whether a line is known from its first column
// follows a two-state chain over lines, so predictable code comes in runs
// (a body that follows from its signature). A continuation is exact through
// the lines the model knows and ends with one corrupted line where its
// knowledge runs out.
struct CorpusBuildOptions {
  // Positions with no entry at all.
  double p_missing = 0.1;
  double p_known_after_known = 0.8;
  double p_known_after_unknown = 0.15;
  // Among lines not known from the first column.
  double p_never = 0.4;
  // Continuation: rest of the current line plus at most this many lines.
  int extra_lines = 8;
  int max_code_points = 400;
  int context_code_points = MockCorpus::kDefaultContext;

  void validate() const;
};

MockCorpus build_replay_corpus(const std::vector<GroundTruthFile>& files,
                               const CorpusBuildOptions& options, std::uint64_t seed);

}  // namespace scopecomplete

#endif  // SCOPECOMPLETE_REPLAY_H_
