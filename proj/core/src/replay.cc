#include "scopecomplete/replay.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "config_section.h"
#include "scopecomplete/clock.h"
#include "scopecomplete/engine.h"
#include "scopecomplete/text.h"

namespace scopecomplete {
namespace {

using detail::json;
using detail::Section;

double lognormal(std::mt19937_64& rng, double median, double sigma) {
  std::lognormal_distribution<double> d(std::log(median), sigma);
  return d(rng);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One replayed session. The clock is virtual: generation cost is charged by
// the mock backend, pauses by the script.
class Session {
 public:
  Session(const SessionScript& script, std::shared_ptr<const MockCorpus> corpus,
          const ReplayOptions& options, std::uint64_t seed)
      : script_(script), options_(options), seed_(seed),
        clock_(std::make_shared<ManualClock>()),
        sink_(std::make_shared<MemoryTelemetrySink>()) {
    ServerConfig config = options.engine;
    config.backend.kind = BackendConfig::Kind::kMock;
    config.telemetry_path.clear();
    if (config.user_id.empty()) config.user_id = "replay";
    MockConfig mock = config.backend.mock;
    mock.first_chunk_ms = options.latency.first_token_ms * options.latency_scale;
    mock.per_token_ms = options.latency.per_token_ms * options.latency_scale;
    auto backend = std::make_shared<MockBackend>(std::move(corpus), mock, clock_);
    engine_ = std::make_unique<CompletionEngine>(config, backend, sink_);
  }

  SessionMetrics run() {
    engine_->open_document(script_.uri, script_.language_id, version_, "");
    const auto& events = script_.events;
    for (std::size_t i = 0; i < events.size();) {
      if (const auto* p = std::get_if<Pause>(&events[i])) {
        double window = 0;
        for (; i < events.size(); ++i) {
          p = std::get_if<Pause>(&events[i]);
          if (!p) break;
          if (skip_.empty()) window += p->ms;
        }
        if (window > 0) pause(window, i);
        continue;
      }
      std::visit([&](const auto& e) { handle(e); }, events[i]);
      ++i;
    }

    SessionMetrics m;
    m.uri = script_.uri;
    m.final_text = engine_->document(script_.uri)->text();
    m.matches_ground_truth = m.final_text == script_.ground_truth;
    engine_->shutdown();
    engine_->close_document(script_.uri);
    m.events = sink_->events();
    m.metrics = aggregate(m.events);
    m.keystrokes = keystrokes_;
    m.requests = requests_;
    m.duration_ms = clock_->now_ms();
    return m;
  }

 private:
  void handle(const TypeChar& e) {
    if (!skip_.empty()) {
      if (skip_.compare(0, e.ch.size(), e.ch) == 0) {
        skip_.erase(0, e.ch.size());
        return;
      }
      skip_.clear();
    }
    ++keystrokes_;
    engine_->record_typed(script_.uri, 1);
    edit(e.ch);
    request(false);
  }

  void handle(const MoveCursor& e) {
    skip_.clear();
    job_.reset();
    cursor_ = e.to;
    engine_->cursor_moved(script_.uri, cursor_);
  }

  void handle(const ExplicitTrigger&) {
    skip_.clear();
    request(true);
  }

  void handle(const Pause&) {}

  void edit(const std::string& inserted) {
    engine_->apply_document_edit(script_.uri, ++version_,
                                 {TextEdit::insertion(cursor_, inserted)});
    cursor_ = end_of_insertion(cursor_, inserted);
  }

  void request(bool explicit_shortcut) {
    CompletionRequest r;
    r.request_id = script_.uri + "#" + std::to_string(++requests_);
    r.uri = script_.uri;
    r.version = version_;
    r.cursor = cursor_;
    r.origin.explicit_shortcut = explicit_shortcut;
    job_ = engine_->start_completion(std::move(r));
  }

  // The user is idle for `window` ms before the next script event. A
  // suggestion shows up only if it arrives strictly before that event.
  void pause(double window, std::size_t event_index) {
    const double end = clock_->now_ms() + window;
    if (!job_) {
      clock_->set(end);
      return;
    }
    for (int guard = 0; !job_->done() && clock_->now_ms() < end; ++guard) {
      if (guard > 1000000) throw std::runtime_error("replay: generation does not progress");
      job_->step();
    }
    const bool shown = job_->done() && clock_->now_ms() < end &&
                       job_->response().suggestion.has_value();
    if (!shown) {
      // Late work is cut off by the next keystroke.
      clock_->set(end);
      return;
    }
    const CompletionResponse response = job_->response();
    const Suggestion& s = *response.suggestion;
    engine_->suggestion_displayed(response.request_id);
    const Document doc = *engine_->document(script_.uri);
    if (!AcceptOracle::accepts(doc, cursor_, script_.ground_truth, s.text)) {
      clock_->set(end);
      return;
    }
    std::mt19937_64 rng(mix_seed(seed_, event_index));
    clock_->advance(lognormal(rng, options_.pauses.think_pause_ms, options_.pauses.sigma));
    const Position after = engine_->accept_suggestion(response.request_id);
    edit(s.text);
    if (cursor_ != after) throw std::logic_error("replay: accept moved the cursor elsewhere");
    skip_ += s.text;
    request(false);
  }

  const SessionScript& script_;
  const ReplayOptions& options_;
  std::uint64_t seed_;
  std::shared_ptr<ManualClock> clock_;
  std::shared_ptr<MemoryTelemetrySink> sink_;
  std::unique_ptr<CompletionEngine> engine_;
  std::shared_ptr<CompletionJob> job_;
  std::int64_t version_ = 0;
  Cursor cursor_;
  // Accepted text the script still has keystrokes for.
  std::string skip_;
  int keystrokes_ = 0;
  int requests_ = 0;
};

}  // namespace

void PauseModel::validate() const {
  if (!(median_ms > 0)) throw ConfigError("pauses.median_ms must be > 0");
  if (!(sigma >= 0)) throw ConfigError("pauses.sigma must be >= 0");
  if (!(think_pause_ms > 0)) throw ConfigError("pauses.think_pause_ms must be > 0");
}

void ReplayOptions::validate() const {
  pauses.validate();
  latency.validate();
  if (!(latency_scale >= 0)) throw ConfigError("latency_scale must be >= 0");
}

SessionScript make_session_script(std::string uri, std::string language_id,
                                  std::string ground_truth, const PauseModel& pauses,
                                  std::uint64_t seed) {
  pauses.validate();
  SessionScript s;
  s.uri = std::move(uri);
  s.language_id = std::move(language_id);
  s.ground_truth = std::move(ground_truth);
  std::mt19937_64 rng(seed);
  const std::string& gt = s.ground_truth;
  bool line_start = true;
  for (std::size_t i = 0; i < gt.size();) {
    const std::size_t n = text::sequence_length(gt, i);
    const double median = line_start ? pauses.think_pause_ms : pauses.median_ms;
    s.events.emplace_back(Pause{lognormal(rng, median, pauses.sigma)});
    s.events.emplace_back(TypeChar{gt.substr(i, n)});
    line_start = gt[i] == '\n';
    i += n;
  }
  return s;
}

std::string replay_typing_only(const SessionScript& script) {
  LanguageFamily family =
      family_for_language(script.language_id).value_or(LanguageFamily::kIndentScoped);
  Document doc("", family, 0);
  Cursor cursor;
  for (const SessionEvent& e : script.events) {
    if (const auto* t = std::get_if<TypeChar>(&e)) {
      doc = doc.apply(TextEdit::insertion(cursor, t->ch), doc.version() + 1);
      cursor = end_of_insertion(cursor, t->ch);
    } else if (const auto* m = std::get_if<MoveCursor>(&e)) {
      cursor = m->to;
    }
  }
  return doc.text();
}

bool AcceptOracle::accepts(const Document& document, Cursor cursor,
                           std::string_view ground_truth, std::string_view suggestion) {
  if (suggestion.empty() || cursor != document.end_position()) return false;
  const std::string& typed = document.text();
  if (ground_truth.substr(0, typed.size()) != typed) return false;
  return ground_truth.substr(typed.size()).substr(0, suggestion.size()) == suggestion;
}

SessionMetrics replay_session(const SessionScript& script,
                              std::shared_ptr<const MockCorpus> corpus,
                              const ReplayOptions& options, std::uint64_t seed) {
  options.validate();
  if (!corpus) corpus = std::make_shared<MockCorpus>();
  return Session(script, std::move(corpus), options, seed).run();
}

SessionMetrics replay_session(const std::string& uri, const std::string& language_id,
                              const std::string& ground_truth,
                              std::shared_ptr<const MockCorpus> corpus,
                              const ReplayOptions& options, std::uint64_t seed) {
  const SessionScript script =
      make_session_script(uri, language_id, ground_truth, options.pauses, seed);
  return replay_session(script, std::move(corpus), options, seed);
}

MetricsReport aggregate(const std::vector<SessionMetrics>& sessions) {
  std::vector<TelemetryEvent> all;
  for (const SessionMetrics& s : sessions) {
    all.insert(all.end(), s.events.begin(), s.events.end());
  }
  return aggregate(all);
}

std::string language_for_path(const std::string& path) {
  const std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".py") return "python";
  if (ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".h" || ext == ".hpp") {
    return "cpp";
  }
  if (ext == ".c") return "c";
  if (ext == ".java") return "java";
  if (ext == ".js") return "javascript";
  return "";
}

std::vector<GroundTruthFile> load_ground_truth(const std::string& corpus_dir) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(corpus_dir) / "ground_truth";
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("no ground_truth directory in " + corpus_dir);
  }
  std::vector<GroundTruthFile> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string language = language_for_path(entry.path().string());
    if (language.empty()) continue;
    files.push_back({entry.path().filename().string(), std::move(language),
                     read_file(entry.path())});
  }
  std::sort(files.begin(), files.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
  return files;
}

CorpusReplay replay_corpus(const std::string& corpus_dir, const ReplayOptions& options,
                           std::uint64_t seed) {
  const auto files = load_ground_truth(corpus_dir);
  const auto path = std::filesystem::path(corpus_dir) / "mock_corpus.jsonl";
  auto corpus = std::make_shared<MockCorpus>();
  if (std::filesystem::exists(path)) *corpus = MockCorpus::load_file(path.string());

  CorpusReplay out;
  for (std::size_t i = 0; i < files.size(); ++i) {
    out.sessions.push_back(replay_session(files[i].name, files[i].language_id,
                                          files[i].text, corpus, options, seed + i));
  }
  out.report = aggregate(out.sessions);
  return out;
}

ReplayOptions parse_replay_options(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ReplayOptions o;
  Section root(doc, "");
  json engine;
  root.get("engine", engine);
  if (!engine.is_null()) {
    try {
      o.engine = parse_config(engine.dump());
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("engine: ") + e.what());
    }
  }
  root.section("pauses", [&](Section& p) {
    p.get("median_ms", o.pauses.median_ms)
        .get("sigma", o.pauses.sigma)
        .get("think_pause_ms", o.pauses.think_pause_ms);
  });
  root.section("latency", [&](Section& l) {
    l.get("first_token_ms", o.latency.first_token_ms)
        .get("per_token_ms", o.latency.per_token_ms);
  });
  root.get("latency_scale", o.latency_scale);
  root.finish();
  o.validate();
  return o;
}

void CorpusBuildOptions::validate() const {
  const auto unit = [](double p) { return p >= 0 && p <= 1; };
  if (!unit(p_missing) || !unit(p_known_after_known) ||
      !unit(p_known_after_unknown) || !unit(p_never)) {
    throw ConfigError("corpus probabilities must lie in [0, 1]");
  }
  if (extra_lines < 0 || max_code_points < 1 || context_code_points < 1) {
    throw ConfigError("corpus sizes must be positive");
  }
}

MockCorpus build_replay_corpus(const std::vector<GroundTruthFile>& files,
                               const CorpusBuildOptions& options, std::uint64_t seed) {
  options.validate();
  MockCorpus corpus;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0, 1);
  constexpr std::size_t kNever = std::string::npos;

  // One wrong character in the code of `s`; whitespace-only text is kept.
  auto corrupt = [&](std::string s) {
    std::vector<std::size_t> spots;
    for (std::size_t j = 0; j < s.size(); ++j) {
      const auto c = static_cast<unsigned char>(s[j]);
      if (c < 0x80 && !text::is_space(s[j])) spots.push_back(j);
    }
    if (spots.empty()) return s;
    const std::size_t j =
        spots[std::uniform_int_distribution<std::size_t>(0, spots.size() - 1)(rng)];
    s[j] = s[j] == 'Q' ? 'Z' : 'Q';
    return s;
  };

  for (const GroundTruthFile& f : files) {
    const std::string& gt = f.text;
    std::vector<std::size_t> starts{0};
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i] == '\n' && i + 1 < gt.size()) starts.push_back(i + 1);
    }
    auto line_end = [&](std::size_t l) {
      return l + 1 < starts.size() ? starts[l + 1] : gt.size();
    };
    // Bytes of line l the user must type before the model gets the rest.
    std::vector<std::size_t> reveal(starts.size());
    bool known = false;
    for (std::size_t l = 0; l < starts.size(); ++l) {
      const std::string_view line =
          std::string_view(gt).substr(starts[l], line_end(l) - starts[l]);
      if (text::is_blank(line)) {
        reveal[l] = 0;
        continue;
      }
      known = unit(rng) <
              (known ? options.p_known_after_known : options.p_known_after_unknown);
      if (known) {
        reveal[l] = 0;
      } else if (unit(rng) < options.p_never) {
        reveal[l] = kNever;
      } else {
        const std::size_t indent = line.find_first_not_of(" \t");
        std::size_t code_end = line.size();
        while (code_end > indent && text::is_space(line[code_end - 1])) --code_end;
        reveal[l] = std::uniform_int_distribution<std::size_t>(indent, code_end)(rng);
      }
    }

    std::size_t l = 0;
    for (std::size_t pos = 0; pos < gt.size(); pos += text::sequence_length(gt, pos)) {
      while (pos >= line_end(l)) ++l;
      if (unit(rng) < options.p_missing) continue;
      const std::string rest = gt.substr(pos, line_end(l) - pos);
      std::string cont;
      if (reveal[l] == kNever || pos - starts[l] < reveal[l]) {
        cont = corrupt(rest);
      } else {
        cont = rest;
        for (std::size_t k = l + 1; k < starts.size() && k <= l + options.extra_lines;
             ++k) {
          const std::string line = gt.substr(starts[k], line_end(k) - starts[k]);
          if (reveal[k] != 0) {
            cont += corrupt(line);
            break;
          }
          cont += line;
        }
      }
      cont = std::string(text::head_code_points(
          cont, static_cast<std::size_t>(options.max_code_points)));
      corpus.add(std::string_view(gt).substr(0, pos), std::move(cont),
                 options.context_code_points);
    }
  }
  return corpus;
}

}  // namespace scopecomplete
