#include "scopecomplete/simulator.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>

#include "config_section.h"

namespace scopecomplete {
namespace {

using detail::json;
using detail::Section;

enum class Fate { kPending, kCompleted, kCancelled, kTimedOut };

struct ReqState {
  // What the client saw.
  Fate fate = Fate::kPending;
  bool in_batch = false;
  int generated = 0;
  int worker = -1;
  double admitted_ms = -1;
  double end_ms = 0;
};

enum EventType { kToken = 0, kArrival = 1, kTimeout = 2 };

struct Event {
  double t;
  int type;
  long long seq;
  int req;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.type != b.type) return a.type > b.type;
    return a.seq > b.seq;
  }
};

double percentile(std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0;
  const auto rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

class Simulation {
 public:
  Simulation(const std::vector<SimRequest>& reqs, const SimOptions& opt)
      : reqs_(reqs), opt_(opt), state_(reqs.size()),
        workers_(static_cast<std::size_t>(opt.workers)) {}

  SimReport run() {
    for (std::size_t i = 0; i < reqs_.size(); ++i) {
      push(reqs_[i].arrival_ms, kArrival, static_cast<int>(i));
    }
    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      switch (e.type) {
        case kArrival: on_arrival(e.t, e.req); break;
        case kToken: on_token(e.t, e.req); break;
        case kTimeout: on_timeout(e.t, e.req); break;
      }
    }
    return report();
  }

 private:
  void push(double t, int type, int req) {
    events_.push(Event{t, type, seq_++, req});
  }

  double gestation(SuggestionKind kind) const {
    if (opt_.qos.mode != QosPolicy::Mode::kGestation) return 0;
    return kind == SuggestionKind::kMultiLine ? opt_.qos.multi_line_gestation_ms
                                              : opt_.qos.single_line_gestation_ms;
  }

  double weight(SuggestionKind kind) const {
    return kind == SuggestionKind::kMultiLine ? opt_.qos.multi_line_weight
                                              : opt_.qos.single_line_weight;
  }

  std::deque<int>& queue_for(SuggestionKind kind) {
    return kind == SuggestionKind::kMultiLine ? multi_queue_ : single_queue_;
  }

  void on_arrival(double t, int r) {
    const SimRequest& req = reqs_[static_cast<std::size_t>(r)];
    queue_for(req.kind).push_back(r);
    push(req.arrival_ms + req.deadline_ms + gestation(req.kind), kTimeout, r);
    dispatch(t);
  }

  void on_token(double t, int r) {
    ReqState& s = state_[static_cast<std::size_t>(r)];
    if (!s.in_batch) return;
    const SimRequest& req = reqs_[static_cast<std::size_t>(r)];
    ++s.generated;
    int target = req.tokens_to_generate;
    if (opt_.streaming_cancel && req.cancel_after_tokens) {
      target = std::max(1, *req.cancel_after_tokens);
    }
    if (s.generated >= target) {
      if (s.fate == Fate::kPending) {
        settle(t, r, target < req.tokens_to_generate ? Fate::kCancelled
                                                     : Fate::kCompleted);
      }
      leave(t, r);
      return;
    }
    const auto batch =
        static_cast<int>(workers_[static_cast<std::size_t>(s.worker)].size());
    push(t + opt_.latency.per_token_at(batch), kToken, r);
  }

  void on_timeout(double t, int r) {
    ReqState& s = state_[static_cast<std::size_t>(r)];
    if (s.fate != Fate::kPending) return;
    // The serving tier enforces the deadline itself, stream or not. Queued
    // requests are skipped lazily when they reach the queue head.
    settle(t, r, Fate::kTimedOut);
    if (s.in_batch) leave(t, r);
  }

  void settle(double t, int r, Fate fate) {
    ReqState& s = state_[static_cast<std::size_t>(r)];
    s.fate = fate;
    s.end_ms = t;
  }

  void leave(double t, int r) {
    ReqState& s = state_[static_cast<std::size_t>(r)];
    s.in_batch = false;
    auto& batch = workers_[static_cast<std::size_t>(s.worker)];
    batch.erase(std::find(batch.begin(), batch.end(), r));
    last_token_ms_ = std::max(last_token_ms_, t);
    dispatch(t);
  }

  // Next queued request by QoS order, or -1.
  int pop_next(double t) {
    auto head = [&](std::deque<int>& q) {
      while (!q.empty() &&
             state_[static_cast<std::size_t>(q.front())].fate != Fate::kPending) {
        q.pop_front();
      }
      return q.empty() ? -1 : q.front();
    };
    const int a = head(single_queue_);
    const int b = head(multi_queue_);
    if (a < 0 && b < 0) return -1;
    int pick;
    if (a < 0 || b < 0) {
      pick = a < 0 ? b : a;
    } else {
      const SimRequest& ra = reqs_[static_cast<std::size_t>(a)];
      const SimRequest& rb = reqs_[static_cast<std::size_t>(b)];
      bool take_b;
      if (opt_.qos.mode == QosPolicy::Mode::kGestation) {
        const double sa = weight(ra.kind) * (t - ra.arrival_ms);
        const double sb = weight(rb.kind) * (t - rb.arrival_ms);
        take_b = sb > sa || (sb == sa && rb.arrival_ms < ra.arrival_ms);
      } else {
        take_b = rb.arrival_ms < ra.arrival_ms ||
                 (rb.arrival_ms == ra.arrival_ms && b < a);
      }
      pick = take_b ? b : a;
    }
    queue_for(reqs_[static_cast<std::size_t>(pick)].kind).pop_front();
    return pick;
  }

  // Least loaded worker that can take a request now, or -1.
  int free_worker() const {
    int best = -1;
    for (std::size_t w = 0; w < workers_.size(); ++w) {
      const auto size = static_cast<int>(workers_[w].size());
      const bool open = opt_.batch.continuous ? size < opt_.batch.max_batch
                                              : size == 0;
      if (!open) continue;
      if (best < 0 || size < static_cast<int>(workers_[static_cast<std::size_t>(best)].size())) {
        best = static_cast<int>(w);
      }
    }
    return best;
  }

  void dispatch(double t) {
    for (;;) {
      const int w = free_worker();
      if (w < 0) return;
      auto& batch = workers_[static_cast<std::size_t>(w)];
      std::vector<int> admitted;
      const std::size_t take = opt_.batch.continuous
                                   ? 1
                                   : static_cast<std::size_t>(opt_.batch.max_batch);
      while (admitted.size() < take) {
        const int r = pop_next(t);
        if (r < 0) break;
        admitted.push_back(r);
        batch.push_back(r);
      }
      if (admitted.empty()) return;
      const auto size = static_cast<int>(batch.size());
      max_batch_seen_ = std::max(max_batch_seen_, size);
      for (int r : admitted) {
        ReqState& s = state_[static_cast<std::size_t>(r)];
        s.worker = w;
        s.in_batch = true;
        s.admitted_ms = t;
        push(t + opt_.latency.first_token_at(size), kToken, r);
      }
    }
  }

  SimReport report() const {
    SimReport rep;
    std::vector<double> lat_single, lat_multi, lat_all;
    double queue_single = 0, queue_multi = 0;
    double first = 0, last = 0;
    long long useful = 0;
    for (std::size_t i = 0; i < reqs_.size(); ++i) {
      const SimRequest& req = reqs_[i];
      const ReqState& s = state_[i];
      const bool multi = req.kind == SuggestionKind::kMultiLine;
      KindReport& k = multi ? rep.multi_line : rep.single_line;
      ++k.requests;
      long long wasted = 0;
      switch (s.fate) {
        case Fate::kCompleted: ++k.completed; break;
        case Fate::kCancelled: ++k.cancelled; break;
        case Fate::kTimedOut: ++k.timed_out; break;
        case Fate::kPending: break;
      }
      if (s.fate == Fate::kTimedOut) {
        wasted = s.generated;
      } else {
        ++k.served;
        if (req.cancel_after_tokens) {
          wasted = std::max(0, s.generated - *req.cancel_after_tokens);
        }
      }
      k.generated_tokens += s.generated;
      k.wasted_tokens += wasted;
      useful += s.generated - wasted;
      const double latency = s.end_ms - req.arrival_ms;
      const double queued =
          (s.admitted_ms >= 0 ? s.admitted_ms : s.end_ms) - req.arrival_ms;
      (multi ? lat_multi : lat_single).push_back(latency);
      lat_all.push_back(latency);
      (multi ? queue_multi : queue_single) += queued;
      if (i == 0 || req.arrival_ms < first) first = req.arrival_ms;
      last = std::max(last, s.end_ms);
    }
    auto finish_kind = [](KindReport& k, std::vector<double>& lat, double queued) {
      std::sort(lat.begin(), lat.end());
      k.p50_ms = percentile(lat, 0.50);
      k.p90_ms = percentile(lat, 0.90);
      k.p99_ms = percentile(lat, 0.99);
      if (k.requests > 0) {
        k.timeout_rate = static_cast<double>(k.timed_out) / k.requests;
        k.mean_queue_ms = queued / k.requests;
      }
    };
    finish_kind(rep.single_line, lat_single, queue_single);
    finish_kind(rep.multi_line, lat_multi, queue_multi);
    KindReport& a = rep.all;
    for (const KindReport* k : {&rep.single_line, &rep.multi_line}) {
      a.requests += k->requests;
      a.completed += k->completed;
      a.cancelled += k->cancelled;
      a.timed_out += k->timed_out;
      a.served += k->served;
      a.generated_tokens += k->generated_tokens;
      a.wasted_tokens += k->wasted_tokens;
    }
    finish_kind(a, lat_all, queue_single + queue_multi);
    last = std::max(last, last_token_ms_);
    rep.makespan_ms = reqs_.empty() ? 0 : last - first;
    if (rep.makespan_ms > 0) {
      rep.useful_tokens_per_s = static_cast<double>(useful) * 1000.0 / rep.makespan_ms;
      rep.served_per_s = a.served * 1000.0 / rep.makespan_ms;
    }
    rep.max_batch_seen = max_batch_seen_;
    return rep;
  }

  const std::vector<SimRequest>& reqs_;
  const SimOptions& opt_;
  std::vector<ReqState> state_;
  std::vector<std::vector<int>> workers_;
  std::deque<int> single_queue_;
  std::deque<int> multi_queue_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  long long seq_ = 0;
  double last_token_ms_ = 0;
  int max_batch_seen_ = 0;
};

void validate_requests(const std::vector<SimRequest>& reqs) {
  double prev = 0;
  for (std::size_t i = 0; i < reqs.size(); ++i) {
    const SimRequest& r = reqs[i];
    const std::string where = "request " + std::to_string(r.id);
    if (r.tokens_to_generate < 1) {
      throw ConfigError(where + ": tokens_to_generate must be >= 1");
    }
    if (r.cancel_after_tokens &&
        (*r.cancel_after_tokens < 0 || *r.cancel_after_tokens > r.tokens_to_generate)) {
      throw ConfigError(where + ": cancel_after_tokens out of range");
    }
    if (!(r.deadline_ms > 0)) throw ConfigError(where + ": deadline must be > 0");
    if (!(r.arrival_ms >= 0)) throw ConfigError(where + ": arrival must be >= 0");
    if (i > 0 && r.arrival_ms < prev) {
      throw ConfigError(where + ": requests must be sorted by arrival");
    }
    prev = r.arrival_ms;
  }
}

double lognormal_sigma(double p50, double p90) {
  // z of the 90th percentile of the standard normal.
  constexpr double kZ90 = 1.2815515655446004;
  return std::log(p90 / p50) / kZ90;
}

}  // namespace

double LatencyModel::factor(int batch) const {
  batch = std::max(batch, 1);
  if (!batch_factor.empty()) {
    const auto i = std::min(static_cast<std::size_t>(batch), batch_factor.size());
    return batch_factor[i - 1];
  }
  if (batch <= flat_until_batch) return 1.0;
  return 1.0 + growth_per_step * (batch - flat_until_batch);
}

void LatencyModel::validate() const {
  if (!(first_token_ms > 0)) throw ConfigError("latency.first_token_ms must be > 0");
  if (!(per_token_ms > 0)) throw ConfigError("latency.per_token_ms must be > 0");
  if (flat_until_batch < 1) throw ConfigError("latency.flat_until_batch must be >= 1");
  if (growth_per_step < 0) throw ConfigError("latency.growth_per_step must be >= 0");
  double prev = 0;
  for (double f : batch_factor) {
    if (!(f > 0)) throw ConfigError("latency.batch_factor entries must be > 0");
    if (f < prev) throw ConfigError("latency.batch_factor must be non-decreasing");
    prev = f;
  }
}

void QosPolicy::validate() const {
  if (single_line_gestation_ms < 0 || multi_line_gestation_ms < 0) {
    throw ConfigError("qos gestation must be >= 0");
  }
  if (!(single_line_weight > 0) || !(multi_line_weight > 0)) {
    throw ConfigError("qos weights must be > 0");
  }
}

std::string_view to_string(QosPolicy::Mode mode) {
  return mode == QosPolicy::Mode::kFifo ? "fifo" : "gestation";
}

void SimOptions::validate() const {
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (batch.max_batch < 1) throw ConfigError("batch.max_batch must be >= 1");
  qos.validate();
  latency.validate();
}

void WorkloadMix::validate() const {
  if (count < 0) throw ConfigError("workload.count must be >= 0");
  if (!(arrival_rate_per_s > 0)) {
    throw ConfigError("workload.arrival_rate_per_s must be > 0");
  }
  if (multi_line_fraction < 0 || multi_line_fraction > 1) {
    throw ConfigError("workload.multi_line_fraction must be in [0, 1]");
  }
  if (!(multi_line_chars_p50 > 0) || multi_line_chars_p90 < multi_line_chars_p50 ||
      !(single_line_chars_p50 > 0) || single_line_chars_p90 < single_line_chars_p50) {
    throw ConfigError("workload length percentiles must satisfy 0 < p50 <= p90");
  }
  if (single_line_max_tokens < 1 || multi_line_max_tokens < 1) {
    throw ConfigError("workload max tokens must be >= 1");
  }
  if (!(chars_per_token > 0)) throw ConfigError("workload.chars_per_token must be > 0");
  if (!(mean_kept_fraction > 0) || !(mean_kept_fraction < 1)) {
    throw ConfigError("workload.mean_kept_fraction must be in (0, 1)");
  }
  if (!(single_line_deadline_ms > 0) || !(multi_line_deadline_ms > 0)) {
    throw ConfigError("workload deadlines must be > 0");
  }
}

std::vector<SimRequest> sample_workload(std::uint64_t seed, const WorkloadMix& mix) {
  mix.validate();
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(mix.arrival_rate_per_s / 1000.0);
  std::bernoulli_distribution is_multi(mix.multi_line_fraction);
  std::lognormal_distribution<double> multi_chars(
      std::log(mix.multi_line_chars_p50),
      lognormal_sigma(mix.multi_line_chars_p50, mix.multi_line_chars_p90));
  std::lognormal_distribution<double> single_chars(
      std::log(mix.single_line_chars_p50),
      lognormal_sigma(mix.single_line_chars_p50, mix.single_line_chars_p90));
  // Beta(a, b) from two gammas; a + b = 5 keeps most cuts in the middle.
  const double a = 5.0 * mix.mean_kept_fraction;
  const double b = 5.0 - a;
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);

  std::vector<SimRequest> out;
  out.reserve(static_cast<std::size_t>(mix.count));
  double t = 0;
  for (int i = 0; i < mix.count; ++i) {
    t += gap(rng);
    SimRequest r;
    r.id = i;
    r.arrival_ms = t;
    const bool multi = is_multi(rng);
    if (multi) {
      r.kind = SuggestionKind::kMultiLine;
      r.chars = std::max(1, static_cast<int>(std::lround(multi_chars(rng))));
      r.tokens_to_generate =
          std::max(1, static_cast<int>(std::lround(r.chars / mix.chars_per_token)));
      if (r.tokens_to_generate > mix.multi_line_max_tokens) {
        r.tokens_to_generate = mix.multi_line_max_tokens;
        r.chars = static_cast<int>(std::lround(r.tokens_to_generate * mix.chars_per_token));
      }
      r.deadline_ms = mix.multi_line_deadline_ms;
      if (mix.model_cancellation) {
        const double x = ga(rng);
        const double y = gb(rng);
        const double kept = x / (x + y);
        r.cancel_after_tokens = std::clamp(
            static_cast<int>(std::lround(kept * r.tokens_to_generate)), 1,
            r.tokens_to_generate);
      }
    } else {
      r.kind = SuggestionKind::kSingleLine;
      int chars = std::max(1, static_cast<int>(std::lround(single_chars(rng))));
      int tokens = std::max(1, static_cast<int>(std::lround(chars / mix.chars_per_token)));
      if (tokens > mix.single_line_max_tokens) {
        tokens = mix.single_line_max_tokens;
        chars = static_cast<int>(std::lround(tokens * mix.chars_per_token));
      }
      r.chars = chars;
      r.tokens_to_generate = tokens;
      r.deadline_ms = mix.single_line_deadline_ms;
    }
    out.push_back(r);
  }
  return out;
}

SimReport run_simulation(const std::vector<SimRequest>& workload,
                         const SimOptions& options) {
  options.validate();
  validate_requests(workload);
  return Simulation(workload, options).run();
}

SimReport run_simulation(const WorkloadMix& mix, std::uint64_t seed,
                         const SimOptions& options) {
  options.validate();
  return run_simulation(sample_workload(seed, mix), options);
}

SimSetup parse_sim_setup(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  SimSetup s;
  Section root(doc, "");
  root.section("workload", [&](Section& w) {
    WorkloadMix& m = s.workload;
    w.get("count", m.count)
        .get("arrival_rate_per_s", m.arrival_rate_per_s)
        .get("multi_line_fraction", m.multi_line_fraction)
        .get("multi_line_chars_p50", m.multi_line_chars_p50)
        .get("multi_line_chars_p90", m.multi_line_chars_p90)
        .get("single_line_chars_p50", m.single_line_chars_p50)
        .get("single_line_chars_p90", m.single_line_chars_p90)
        .get("single_line_max_tokens", m.single_line_max_tokens)
        .get("multi_line_max_tokens", m.multi_line_max_tokens)
        .get("chars_per_token", m.chars_per_token)
        .get("model_cancellation", m.model_cancellation)
        .get("mean_kept_fraction", m.mean_kept_fraction)
        .get("single_line_deadline_ms", m.single_line_deadline_ms)
        .get("multi_line_deadline_ms", m.multi_line_deadline_ms);
  });
  root.get("workers", s.options.workers);
  root.get("streaming_cancel", s.options.streaming_cancel);
  root.section("batch", [&](Section& b) {
    b.get("max_batch", s.options.batch.max_batch)
        .get("continuous", s.options.batch.continuous);
  });
  root.section("qos", [&](Section& q) {
    std::string mode = std::string(to_string(s.options.qos.mode));
    q.get("mode", mode);
    if (mode == "fifo") {
      s.options.qos.mode = QosPolicy::Mode::kFifo;
    } else if (mode == "gestation") {
      s.options.qos.mode = QosPolicy::Mode::kGestation;
    } else {
      throw ConfigError("qos.mode must be \"fifo\" or \"gestation\"");
    }
    q.get("single_line_gestation_ms", s.options.qos.single_line_gestation_ms)
        .get("multi_line_gestation_ms", s.options.qos.multi_line_gestation_ms)
        .get("single_line_weight", s.options.qos.single_line_weight)
        .get("multi_line_weight", s.options.qos.multi_line_weight);
  });
  root.section("latency", [&](Section& l) {
    LatencyModel& m = s.options.latency;
    l.get("first_token_ms", m.first_token_ms)
        .get("per_token_ms", m.per_token_ms)
        .get("flat_until_batch", m.flat_until_batch)
        .get("growth_per_step", m.growth_per_step)
        .get("batch_factor", m.batch_factor);
  });
  root.finish();
  s.workload.validate();
  s.options.validate();
  return s;
}

std::string sim_report_to_json(const SimReport& report) {
  auto kind = [](const KindReport& k) {
    return json{{"requests", k.requests},
                {"completed", k.completed},
                {"cancelled", k.cancelled},
                {"timed_out", k.timed_out},
                {"served", k.served},
                {"timeout_rate", k.timeout_rate},
                {"p50_ms", k.p50_ms},
                {"p90_ms", k.p90_ms},
                {"p99_ms", k.p99_ms},
                {"mean_queue_ms", k.mean_queue_ms},
                {"generated_tokens", k.generated_tokens},
                {"wasted_tokens", k.wasted_tokens}};
  };
  const json j = {{"single_line", kind(report.single_line)},
                  {"multi_line", kind(report.multi_line)},
                  {"all", kind(report.all)},
                  {"makespan_ms", report.makespan_ms},
                  {"useful_tokens_per_s", report.useful_tokens_per_s},
                  {"served_per_s", report.served_per_s},
                  {"max_batch_seen", report.max_batch_seen}};
  return j.dump(2);
}

}  // namespace scopecomplete
