#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "scopecomplete/clock.h"
#include "scopecomplete/engine.h"
#include "scopecomplete/metrics.h"
#include "scopecomplete/mock_backend.h"
#include "scopecomplete/postprocess.h"
#include "scopecomplete/replay.h"
#include "scopecomplete/scope.h"
#include "scopecomplete/simulator.h"
#include "scopecomplete/trigger.h"

namespace scopecomplete {
namespace {

// Python-like file with `functions` functions of a few nested blocks each.
std::string python_file(int functions) {
  std::string s = "import os\n\n";
  for (int i = 0; i < functions; ++i) {
    const std::string n = std::to_string(i);
    s += "def f" + n + "(a, b):\n"
         "    total = 0\n"
         "    for x in a:\n"
         "        if x > b:\n"
         "            total += x\n"
         "        else:\n"
         "            total -= 1\n"
         "    return total\n\n";
  }
  return s;
}

std::string cpp_file(int functions) {
  std::string s = "#include <vector>\n\n";
  for (int i = 0; i < functions; ++i) {
    const std::string n = std::to_string(i);
    s += "int f" + n + "(const std::vector<int>& a, int b) {\n"
         "  int total = 0;\n"
         "  for (int x : a) {\n"
         "    if (x > b) {\n"
         "      total += x;\n"
         "    } else {\n"
         "      total -= 1;\n"
         "    }\n"
         "  }\n"
         "  return total;\n"
         "}\n\n";
  }
  return s;
}

void BM_ParseIndent(benchmark::State& state) {
  const Document doc(python_file(static_cast<int>(state.range(0))),
                     LanguageFamily::kIndentScoped, 1);
  for (auto _ : state) benchmark::DoNotOptimize(parse_document(doc));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(doc.text().size()));
}
BENCHMARK(BM_ParseIndent)->Arg(10)->Arg(100)->Arg(1000);

void BM_ParseBrace(benchmark::State& state) {
  const Document doc(cpp_file(static_cast<int>(state.range(0))),
                     LanguageFamily::kBraceScoped, 1);
  for (auto _ : state) benchmark::DoNotOptimize(parse_document(doc));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(doc.text().size()));
}
BENCHMARK(BM_ParseBrace)->Arg(10)->Arg(100)->Arg(1000);

void BM_DecideTrigger(benchmark::State& state) {
  const Document doc(python_file(200), LanguageFamily::kIndentScoped, 1);
  const ScopeTree tree = parse_document(doc);
  std::mt19937 rng(1);
  std::vector<Cursor> cursors;
  for (int i = 0; i < 256; ++i) {
    const int line = std::uniform_int_distribution<int>(0, doc.line_count() - 1)(rng);
    cursors.push_back({line, doc.line_length(line)});
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        decide_trigger(doc, cursors[i++ % cursors.size()], {}, tree, TriggerConfig{}));
  }
}
BENCHMARK(BM_DecideTrigger);

const char kRaw[] =
    "total = 0\n    for x in a:\n        total += x\n    return total\n\n"
    "def g(c):\n    return c\n";

void BM_TruncateToScope(benchmark::State& state) {
  const Document doc("def f(a):\n    ", LanguageFamily::kIndentScoped, 1);
  const ScopeTree tree = parse_document(doc);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        truncate_to_scope(kRaw, tree, doc, {1, 4}, SuggestionKind::kMultiLine));
  }
}
BENCHMARK(BM_TruncateToScope);

void BM_StreamingCut(benchmark::State& state) {
  const Document doc("def f(a):\n    ", LanguageFamily::kIndentScoped, 1);
  const ScopeTree tree = parse_document(doc);
  const ScopeCutContext ctx =
      ScopeCutContext::from(doc, {1, 4}, tree, SuggestionKind::kMultiLine, TriggerConfig{});
  const std::string raw = kRaw;
  for (auto _ : state) {
    ScopeCutMonitor monitor(ctx);
    for (std::size_t i = 0; i < raw.size(); i += 8) {
      if (monitor.feed(std::string_view(raw).substr(i, 8))) break;
    }
    benchmark::DoNotOptimize(monitor.cut());
  }
}
BENCHMARK(BM_StreamingCut);

void BM_EngineCacheHit(benchmark::State& state) {
  auto corpus = std::make_shared<MockCorpus>();
  corpus->add("def f(a):", std::string("\n    ") + kRaw, 9);
  auto clock = std::make_shared<ManualClock>();
  auto backend = std::make_shared<MockBackend>(corpus, MockConfig{}, clock);
  CompletionEngine engine(ServerConfig{}, backend);
  engine.open_document("a.py", "python", 1, "def f(a):");
  CompletionRequest r;
  r.uri = "a.py";
  r.version = 1;
  r.cursor = {0, 9};
  engine.handle_inline_completion(r);
  for (auto _ : state) benchmark::DoNotOptimize(engine.handle_inline_completion(r));
}
BENCHMARK(BM_EngineCacheHit);

void BM_SimulateDefaultWorkload(benchmark::State& state) {
  WorkloadMix mix;
  mix.count = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_simulation(mix, 1, SimOptions{}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateDefaultWorkload)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ReplayCorpus(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(replay_corpus(SCOPECOMPLETE_CORPUS_DIR, ReplayOptions{}, 1));
  }
}
BENCHMARK(BM_ReplayCorpus)->Unit(benchmark::kMillisecond);

void BM_AggregateTelemetry(benchmark::State& state) {
  std::vector<TelemetryEvent> events;
  for (int i = 0; i < state.range(0); ++i) {
    TelemetryEvent e;
    e.request_id = "r" + std::to_string(i);
    e.suggestion_kind = i % 6 ? SuggestionKind::kSingleLine : SuggestionKind::kMultiLine;
    e.kind = TelemetryKind::kRequested;
    events.push_back(e);
    e.kind = TelemetryKind::kDisplayed;
    e.display_ms = (i % 3) * 500.0;
    e.latency_ms = 200 + i % 700;
    e.chars = 20;
    events.push_back(e);
    if (i % 4 == 0) {
      e.kind = TelemetryKind::kAccepted;
      events.push_back(e);
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(events));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_AggregateTelemetry)->Arg(10000)->Arg(100000);

}  // namespace
}  // namespace scopecomplete

BENCHMARK_MAIN();
