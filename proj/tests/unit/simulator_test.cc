#include "scopecomplete/simulator.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "json.hpp"
#include "scopecomplete/config.h"

namespace scopecomplete {
namespace {

SimRequest req(int id, double arrival, int tokens,
               SuggestionKind kind = SuggestionKind::kSingleLine) {
  SimRequest r;
  r.id = id;
  r.kind = kind;
  r.arrival_ms = arrival;
  r.tokens_to_generate = tokens;
  r.deadline_ms = 10000;
  return r;
}

SimOptions one_worker() {
  SimOptions o;
  o.workers = 1;
  o.latency.first_token_ms = 100;
  o.latency.per_token_ms = 20;
  return o;
}

TEST(LatencyModel, DefaultCurveIsFlatThenGrows) {
  LatencyModel m;
  EXPECT_DOUBLE_EQ(m.factor(1), 1.0);
  EXPECT_DOUBLE_EQ(m.factor(8), 1.0);
  EXPECT_DOUBLE_EQ(m.factor(9), 1.1);
  EXPECT_DOUBLE_EQ(m.factor(16), 1.8);
  m.batch_factor = {1.0, 1.5, 2.0};
  EXPECT_DOUBLE_EQ(m.factor(2), 1.5);
  EXPECT_DOUBLE_EQ(m.factor(7), 2.0);
  EXPECT_DOUBLE_EQ(m.per_token_at(2), m.per_token_ms * 1.5);
}

TEST(LatencyModel, Validation) {
  LatencyModel m;
  m.batch_factor = {1.0, 0.9};
  EXPECT_THROW(m.validate(), ConfigError);
  m.batch_factor = {0.0};
  EXPECT_THROW(m.validate(), ConfigError);
  m.batch_factor.clear();
  m.per_token_ms = 0;
  EXPECT_THROW(m.validate(), ConfigError);
}

TEST(Simulator, SingleRequestArithmetic) {
  const SimReport r = run_simulation({req(0, 0, 10)}, one_worker());
  EXPECT_EQ(r.all.completed, 1);
  EXPECT_DOUBLE_EQ(r.all.p50_ms, 100 + 9 * 20);
  EXPECT_EQ(r.all.generated_tokens, 10);
  EXPECT_EQ(r.all.wasted_tokens, 0);
}

TEST(Simulator, AdmissionAtLaterArrival) {
  // Latency counts from arrival; the worker is idle so admission is
  // immediate.
  const SimReport r = run_simulation({req(0, 500, 10)}, one_worker());
  EXPECT_DOUBLE_EQ(r.all.p50_ms, 280);
  EXPECT_DOUBLE_EQ(r.all.mean_queue_ms, 0);
}

TEST(Simulator, BatchSizeSlowsTokens) {
  SimOptions o = one_worker();
  o.latency.batch_factor = {1.0, 2.0};
  // A joins alone (first token at 100), B joins a batch of two (first token
  // at 200). A's later tokens run at batch 2: 140, 180. B's run after A has
  // left: 220, 240.
  const SimReport r = run_simulation({req(0, 0, 3), req(1, 0, 3)}, o);
  EXPECT_DOUBLE_EQ(r.all.p50_ms, 180);
  EXPECT_DOUBLE_EQ(r.all.p99_ms, 240);
  EXPECT_EQ(r.max_batch_seen, 2);
}

TEST(Simulator, StaticBatchingWaitsForEmptyWorker) {
  SimOptions o = one_worker();
  o.batch.continuous = false;
  o.batch.max_batch = 4;
  // The first request runs alone; the other two arrive while it runs and
  // start together at 280.
  const SimReport r =
      run_simulation({req(0, 0, 10), req(1, 10, 10), req(2, 20, 10)}, o);
  EXPECT_DOUBLE_EQ(r.all.p50_ms, 280 + 280 - 20);
  EXPECT_DOUBLE_EQ(r.all.p99_ms, 280 + 280 - 10);

  o.batch.continuous = true;
  const SimReport c =
      run_simulation({req(0, 0, 10), req(1, 10, 10), req(2, 20, 10)}, o);
  EXPECT_DOUBLE_EQ(c.all.p99_ms, 280);
}

TEST(Simulator, QueueTimeout) {
  SimOptions o = one_worker();
  o.batch.max_batch = 1;
  SimRequest late = req(1, 0, 10);
  late.deadline_ms = 200;
  const SimReport r = run_simulation({req(0, 0, 10), late}, o);
  EXPECT_EQ(r.all.completed, 1);
  EXPECT_EQ(r.all.timed_out, 1);
  EXPECT_DOUBLE_EQ(r.all.timeout_rate, 0.5);
  EXPECT_EQ(r.all.generated_tokens, 10);
  EXPECT_DOUBLE_EQ(r.all.p99_ms, 280);
  EXPECT_DOUBLE_EQ(r.all.p50_ms, 200);
}

TEST(Simulator, RunningTimeoutStopsGeneration) {
  SimRequest r0 = req(0, 0, 10);
  r0.deadline_ms = 150;
  // Tokens at 100, 120, 140; the deadline is enforced by the serving tier,
  // with or without a stream.
  for (bool stream : {true, false}) {
    SimOptions o = one_worker();
    o.streaming_cancel = stream;
    const SimReport r = run_simulation({r0}, o);
    EXPECT_EQ(r.all.timed_out, 1);
    EXPECT_EQ(r.all.served, 0);
    EXPECT_EQ(r.all.generated_tokens, 3);
    EXPECT_EQ(r.all.wasted_tokens, 3);
    EXPECT_DOUBLE_EQ(r.all.p50_ms, 150);
  }
}

TEST(Simulator, ScopeCutCancellation) {
  SimRequest r0 = req(0, 0, 10, SuggestionKind::kMultiLine);
  r0.cancel_after_tokens = 4;
  SimOptions o = one_worker();
  o.streaming_cancel = true;
  SimReport with = run_simulation({r0}, o);
  EXPECT_EQ(with.multi_line.cancelled, 1);
  EXPECT_EQ(with.multi_line.generated_tokens, 4);
  EXPECT_EQ(with.multi_line.wasted_tokens, 0);
  EXPECT_DOUBLE_EQ(with.multi_line.p50_ms, 100 + 3 * 20);

  o.streaming_cancel = false;
  SimReport without = run_simulation({r0}, o);
  EXPECT_EQ(without.multi_line.completed, 1);
  EXPECT_EQ(without.multi_line.generated_tokens, 10);
  EXPECT_EQ(without.multi_line.wasted_tokens, 6);
  EXPECT_DOUBLE_EQ(without.multi_line.p50_ms, 280);
}

TEST(Simulator, CancelPointAtEndCountsAsCompleted) {
  SimRequest r0 = req(0, 0, 5, SuggestionKind::kMultiLine);
  r0.cancel_after_tokens = 5;
  const SimReport r = run_simulation({r0}, one_worker());
  EXPECT_EQ(r.all.completed, 1);
  EXPECT_EQ(r.all.cancelled, 0);
}

TEST(Simulator, GestationExtendsMultiLineTolerance) {
  SimOptions o = one_worker();
  o.batch.max_batch = 1;
  SimRequest m = req(1, 0, 5, SuggestionKind::kMultiLine);
  m.deadline_ms = 250;
  const std::vector<SimRequest> w = {req(0, 0, 10), m};
  EXPECT_EQ(run_simulation(w, o).multi_line.timed_out, 1);
  o.qos.mode = QosPolicy::Mode::kGestation;
  o.qos.multi_line_gestation_ms = 300;
  // Admitted at 280, done at 280 + 100 + 4 * 20 < 550.
  const SimReport r = run_simulation(w, o);
  EXPECT_EQ(r.multi_line.completed, 1);
  EXPECT_DOUBLE_EQ(r.multi_line.p50_ms, 460);
}

TEST(Simulator, GestationWeightsReorderQueue) {
  SimOptions o = one_worker();
  o.batch.max_batch = 1;
  const std::vector<SimRequest> w = {
      req(0, 0, 10), req(1, 10, 10),
      req(2, 20, 10, SuggestionKind::kMultiLine)};
  // FIFO: the single-line request that arrived first goes next.
  SimReport fifo = run_simulation(w, o);
  EXPECT_DOUBLE_EQ(fifo.single_line.p99_ms, 280 + 280 - 10);
  EXPECT_DOUBLE_EQ(fifo.multi_line.p50_ms, 3 * 280 - 20);
  // At 280 the multi-line request scores 3 * 260 against 270.
  o.qos.mode = QosPolicy::Mode::kGestation;
  o.qos.multi_line_weight = 3;
  SimReport gest = run_simulation(w, o);
  EXPECT_DOUBLE_EQ(gest.multi_line.p50_ms, 2 * 280 - 20);
  EXPECT_DOUBLE_EQ(gest.single_line.p99_ms, 3 * 280 - 10);
}

TEST(Simulator, RejectsInvalidInput) {
  SimOptions o;
  EXPECT_THROW(run_simulation({req(0, 0, 0)}, o), ConfigError);
  SimRequest bad = req(0, 0, 3);
  bad.cancel_after_tokens = 4;
  EXPECT_THROW(run_simulation({bad}, o), ConfigError);
  EXPECT_THROW(run_simulation({req(0, 10, 1), req(1, 5, 1)}, o), ConfigError);
  SimRequest no_deadline = req(0, 0, 3);
  no_deadline.deadline_ms = 0;
  EXPECT_THROW(run_simulation({no_deadline}, o), ConfigError);
  o.workers = 0;
  EXPECT_THROW(run_simulation({req(0, 0, 1)}, o), ConfigError);
  o.workers = 1;
  o.qos.multi_line_gestation_ms = -1;
  EXPECT_THROW(run_simulation({req(0, 0, 1)}, o), ConfigError);
  WorkloadMix mix;
  mix.multi_line_fraction = 1.5;
  EXPECT_THROW(sample_workload(1, mix), ConfigError);
}

TEST(Simulator, EmptyWorkload) {
  const SimReport r = run_simulation(std::vector<SimRequest>{}, SimOptions{});
  EXPECT_EQ(r.all.requests, 0);
  EXPECT_EQ(r.all.p50_ms, 0);
  EXPECT_EQ(r.makespan_ms, 0);
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(p * static_cast<double>(v.size() - 1))];
}

TEST(SampleWorkload, MultiLineLengthsMatchPaperPercentiles) {
  WorkloadMix mix;
  const auto w = sample_workload(11, mix);
  ASSERT_EQ(w.size(), 10000u);
  std::vector<double> chars;
  double after_cut = 0, total = 0;
  for (const auto& r : w) {
    if (r.kind != SuggestionKind::kMultiLine) {
      EXPECT_LE(r.tokens_to_generate, 25);
      EXPECT_FALSE(r.cancel_after_tokens);
      continue;
    }
    chars.push_back(r.chars);
    EXPECT_LE(r.tokens_to_generate, 120);
    ASSERT_TRUE(r.cancel_after_tokens);
    EXPECT_GE(*r.cancel_after_tokens, 1);
    EXPECT_LE(*r.cancel_after_tokens, r.tokens_to_generate);
    total += r.tokens_to_generate;
    after_cut += r.tokens_to_generate - *r.cancel_after_tokens;
  }
  EXPECT_NEAR(quantile(chars, 0.5), 325, 32.5);
  EXPECT_NEAR(quantile(chars, 0.9), 450, 45);
  EXPECT_NEAR(after_cut / total, 0.54, 0.03);
  EXPECT_NEAR(static_cast<double>(chars.size()) / w.size(), 0.16, 0.015);
}

TEST(SampleWorkload, NoMultiLine) {
  WorkloadMix mix;
  mix.multi_line_fraction = 0;
  mix.count = 2000;
  for (const auto& r : sample_workload(3, mix)) {
    EXPECT_EQ(r.kind, SuggestionKind::kSingleLine);
  }
}

TEST(SampleWorkload, DeterministicAndSorted) {
  WorkloadMix mix;
  mix.count = 3000;
  const auto a = sample_workload(5, mix);
  const auto b = sample_workload(5, mix);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].arrival_ms, b[i].arrival_ms);
    EXPECT_EQ(a[i].tokens_to_generate, b[i].tokens_to_generate);
    EXPECT_EQ(a[i].cancel_after_tokens, b[i].cancel_after_tokens);
    EXPECT_EQ(a[i].kind, b[i].kind);
    if (i > 0) EXPECT_GE(a[i].arrival_ms, a[i - 1].arrival_ms);
  }
  EXPECT_NE(sample_workload(6, mix)[0].arrival_ms, a[0].arrival_ms);
}

TEST(Simulator, LightLoadMediansMatchCalibration) {
  WorkloadMix mix;
  mix.arrival_rate_per_s = 0.5;
  mix.count = 4000;
  const SimReport r = run_simulation(mix, 2, SimOptions{});
  EXPECT_NEAR(r.single_line.p50_ms, 280, 28);
  EXPECT_NEAR(r.multi_line.p50_ms, 750, 75);
}

// Random small workloads and options for the invariants.
struct Case {
  std::vector<SimRequest> workload;
  SimOptions options;
};

Case random_case(std::mt19937_64& rng) {
  auto uni = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  Case c;
  WorkloadMix mix;
  mix.count = uni(20, 300);
  mix.arrival_rate_per_s = uni(5, 80);
  mix.multi_line_fraction = uni(0, 60) / 100.0;
  mix.model_cancellation = uni(0, 4) > 0;
  mix.single_line_deadline_ms = uni(300, 3000);
  mix.multi_line_deadline_ms = uni(300, 3000);
  c.workload = sample_workload(rng(), mix);
  c.options.workers = uni(1, 4);
  c.options.batch.max_batch = uni(1, 20);
  c.options.batch.continuous = uni(0, 3) > 0;
  c.options.qos.mode = uni(0, 1) ? QosPolicy::Mode::kGestation : QosPolicy::Mode::kFifo;
  c.options.qos.multi_line_gestation_ms = uni(0, 1000);
  c.options.qos.multi_line_weight = uni(50, 300) / 100.0;
  c.options.latency.first_token_ms = uni(20, 300);
  c.options.latency.per_token_ms = uni(5, 40);
  c.options.streaming_cancel = uni(0, 1);
  return c;
}

void expect_same(const KindReport& a, const KindReport& b) {
  EXPECT_EQ(a.completed, b.completed);
  EXPECT_EQ(a.cancelled, b.cancelled);
  EXPECT_EQ(a.timed_out, b.timed_out);
  EXPECT_EQ(a.p50_ms, b.p50_ms);
  EXPECT_EQ(a.p99_ms, b.p99_ms);
  EXPECT_EQ(a.generated_tokens, b.generated_tokens);
  EXPECT_EQ(a.wasted_tokens, b.wasted_tokens);
}

TEST(SimulatorProperty, DeterministicConservingAndOrdered) {
  std::mt19937_64 rng(404);
  for (int round = 0; round < 200; ++round) {
    const Case c = random_case(rng);
    const SimReport a = run_simulation(c.workload, c.options);
    const SimReport b = run_simulation(c.workload, c.options);
    expect_same(a.all, b.all);
    for (const KindReport* k : {&a.single_line, &a.multi_line, &a.all}) {
      EXPECT_EQ(k->completed + k->cancelled + k->timed_out, k->requests);
      EXPECT_EQ(k->served, k->completed + k->cancelled);
      EXPECT_LE(k->wasted_tokens, k->generated_tokens);
      EXPECT_LE(k->p50_ms, k->p90_ms);
      EXPECT_LE(k->p90_ms, k->p99_ms);
      EXPECT_GE(k->timeout_rate, 0);
      EXPECT_LE(k->timeout_rate, 1);
    }
    EXPECT_EQ(a.all.requests, static_cast<int>(c.workload.size()));
    EXPECT_LE(a.max_batch_seen, c.options.batch.max_batch);
    if (HasFailure()) {
      ADD_FAILURE() << "round " << round;
      return;
    }
  }
}

// Only without deadlines: once requests time out, cancellation frees capacity
// for queued requests that would otherwise have been dropped, and the total
// can go up.
TEST(SimulatorProperty, CancellationReducesTokens) {
  std::mt19937_64 rng(505);
  int checked = 0;
  for (int round = 0; round < 200; ++round) {
    Case c = random_case(rng);
    for (SimRequest& r : c.workload) r.deadline_ms = 1e9;
    const bool has_cut = std::any_of(
        c.workload.begin(), c.workload.end(), [](const SimRequest& r) {
          return r.cancel_after_tokens && *r.cancel_after_tokens < r.tokens_to_generate;
        });
    if (!has_cut) continue;
    ++checked;
    c.options.streaming_cancel = false;
    const SimReport off = run_simulation(c.workload, c.options);
    c.options.streaming_cancel = true;
    const SimReport on = run_simulation(c.workload, c.options);
    EXPECT_LT(on.all.generated_tokens, off.all.generated_tokens) << "round " << round;
    EXPECT_LE(on.all.wasted_tokens, off.all.wasted_tokens) << "round " << round;
  }
  EXPECT_GT(checked, 100);
}

TEST(SimulatorProperty, MoreWorkersNeverRaisePercentiles) {
  std::mt19937_64 rng(606);
  for (int round = 0; round < 600; ++round) {
    Case c = random_case(rng);
    // Static batching is a comparison mode and can show list-scheduling
    // anomalies; the invariant is about the continuous batcher.
    c.options.batch.continuous = true;
    c.options.workers = 1 + static_cast<int>(rng() % 3);
    const SimReport fewer = run_simulation(c.workload, c.options);
    ++c.options.workers;
    const SimReport more = run_simulation(c.workload, c.options);
    const std::pair<const KindReport*, const KindReport*> pairs[] = {
        {&fewer.single_line, &more.single_line},
        {&fewer.multi_line, &more.multi_line},
        {&fewer.all, &more.all}};
    for (const auto& [f, m] : pairs) {
      EXPECT_LE(m->p50_ms, f->p50_ms + 1e-9) << "round " << round;
      EXPECT_LE(m->p90_ms, f->p90_ms + 1e-9) << "round " << round;
      EXPECT_LE(m->p99_ms, f->p99_ms + 1e-9) << "round " << round;
    }
  }
}

TEST(SimSetup, ParsesAndRejectsUnknownKeys) {
  const SimSetup s = parse_sim_setup(R"json({
    "workload": {"count": 50, "arrival_rate_per_s": 12.5, "multi_line_fraction": 0.3},
    "workers": 3,
    "batch": {"max_batch": 4, "continuous": false},
    "qos": {"mode": "gestation", "multi_line_gestation_ms": 700},
    "latency": {"first_token_ms": 90, "batch_factor": [1, 1, 2]},
    "streaming_cancel": false
  })json");
  EXPECT_EQ(s.workload.count, 50);
  EXPECT_DOUBLE_EQ(s.workload.arrival_rate_per_s, 12.5);
  EXPECT_EQ(s.options.workers, 3);
  EXPECT_FALSE(s.options.batch.continuous);
  EXPECT_EQ(s.options.qos.mode, QosPolicy::Mode::kGestation);
  EXPECT_DOUBLE_EQ(s.options.qos.multi_line_gestation_ms, 700);
  EXPECT_EQ(s.options.latency.batch_factor.size(), 3u);
  EXPECT_FALSE(s.options.streaming_cancel);

  try {
    parse_sim_setup(R"({"qos": {"gestaton_ms": 3}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("qos.gestaton_ms"), std::string::npos);
  }
  EXPECT_THROW(parse_sim_setup(R"({"workers": 0})"), ConfigError);
  EXPECT_THROW(parse_sim_setup(R"({"qos": {"mode": "lifo"}})"), ConfigError);
  EXPECT_THROW(parse_sim_setup("{"), ConfigError);
}

TEST(SimSetup, ReportFieldNames) {
  const SimReport r = run_simulation({req(0, 0, 10)}, one_worker());
  const auto j = nlohmann::json::parse(sim_report_to_json(r));
  for (const char* kind : {"single_line", "multi_line", "all"}) {
    for (const char* f : {"requests", "completed", "cancelled", "timed_out", "served",
                          "timeout_rate", "p50_ms", "p90_ms", "p99_ms",
                          "mean_queue_ms", "generated_tokens", "wasted_tokens"}) {
      EXPECT_TRUE(j[kind].contains(f)) << kind << "." << f;
    }
  }
  EXPECT_EQ(j["all"]["p50_ms"], 280.0);
  EXPECT_TRUE(j.contains("useful_tokens_per_s"));
  EXPECT_TRUE(j.contains("served_per_s"));
  EXPECT_TRUE(j.contains("makespan_ms"));
}

}  // namespace
}  // namespace scopecomplete
