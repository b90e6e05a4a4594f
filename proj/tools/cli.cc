#include "cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "scopecomplete/config.h"
#include "scopecomplete/engine.h"
#include "scopecomplete/lsp_server.h"
#include "scopecomplete/metrics.h"
#include "scopecomplete/replay.h"
#include "scopecomplete/simulator.h"

namespace scopecomplete {
namespace {

using json = nlohmann::json;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Config files are read before anything runs; a missing one is a config
// error.
std::string read_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& body, std::ostream& out) {
  if (path.empty()) {
    out << body << '\n';
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << body << '\n';
  if (!f) throw std::runtime_error("write failed: " + path);
}

struct ServeArgs {
  std::string config;
};

struct ReplayArgs {
  std::string dir = "corpus";
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  std::string telemetry;
  std::optional<double> latency_scale;
  bool single_line_only = false;
};

struct SimArgs {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
};

struct ReportArgs {
  std::vector<std::string> in;
  std::string out;
};

struct CorpusArgs {
  std::string dir = "corpus";
  std::uint64_t seed = 1;
  std::string out;
};

int run_serve(const ServeArgs& a, std::istream& in, std::ostream& out) {
  ServerConfig config = a.config.empty() ? ServerConfig{} : parse_config(read_config(a.config));
  auto backend = make_backend(config, steady_clock());
  LanguageServer server(config, backend, make_telemetry_sink(config), out);
  return server.run(in) == 0 ? kExitOk : kExitRuntime;
}

int run_replay(const ReplayArgs& a, std::ostream& out) {
  ReplayOptions options =
      a.config.empty() ? ReplayOptions{} : parse_replay_options(read_config(a.config));
  if (a.latency_scale) options.latency_scale = *a.latency_scale;
  if (a.single_line_only) options.engine.trigger.multi_line_enabled = false;
  options.validate();

  const CorpusReplay result = replay_corpus(a.dir, options, a.seed);
  json sessions = json::array();
  for (const SessionMetrics& s : result.sessions) {
    sessions.push_back({{"uri", s.uri},
                        {"keystrokes", s.keystrokes},
                        {"requests", s.requests},
                        {"duration_ms", s.duration_ms},
                        {"matches_ground_truth", s.matches_ground_truth},
                        {"chars_accepted", s.metrics.total.chars_accepted},
                        {"percent_keystrokes_saved",
                         s.metrics.total.percent_keystrokes_saved}});
  }
  json body = {{"seed", a.seed},
               {"latency_scale", options.latency_scale},
               {"multi_line_enabled", options.engine.trigger.multi_line_enabled},
               {"report", json::parse(metrics_report_to_json(result.report))},
               {"sessions", sessions}};
  write_output(a.out, body.dump(2), out);

  if (!a.telemetry.empty()) {
    std::ofstream f(a.telemetry, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + a.telemetry);
    for (const SessionMetrics& s : result.sessions) {
      for (const TelemetryEvent& e : s.events) f << to_json_line(e) << '\n';
    }
  }
  return kExitOk;
}

int run_sim(const SimArgs& a, std::ostream& out) {
  SimSetup setup = a.config.empty() ? SimSetup{} : parse_sim_setup(read_config(a.config));
  setup.workload.validate();
  setup.options.validate();
  const SimReport report = run_simulation(setup.workload, a.seed, setup.options);
  write_output(a.out, sim_report_to_json(report), out);
  return kExitOk;
}

int run_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<TelemetryEvent> events;
  int malformed = 0;
  std::vector<std::string> diagnostics;
  for (const std::string& path : a.in) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::vector<std::string> local;
    auto read = read_telemetry(f, &malformed, &local);
    events.insert(events.end(), read.begin(), read.end());
    for (auto& d : local) diagnostics.push_back(path + ": " + d);
  }
  MetricsReport report = aggregate(events);
  report.malformed_records = malformed;
  diagnostics.insert(diagnostics.end(), report.diagnostics.begin(), report.diagnostics.end());
  report.diagnostics = std::move(diagnostics);
  if (malformed > 0) err << "skipped " << malformed << " malformed record(s)\n";
  write_output(a.out, metrics_report_to_json(report), out);
  return kExitOk;
}

int run_corpus(const CorpusArgs& a) {
  const auto files = load_ground_truth(a.dir);
  const MockCorpus corpus = build_replay_corpus(files, CorpusBuildOptions{}, a.seed);
  const std::string path =
      a.out.empty() ? (std::filesystem::path(a.dir) / "mock_corpus.jsonl").string() : a.out;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  corpus.save(f);
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Scope-aware code completion server and evaluation tools",
               "scopecomplete"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Language server over stdio");
  serve_cmd->add_option("--config", serve.config, "Server config (JSON)");

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "Replay typing sessions over a corpus");
  replay_cmd->add_option("--dir", replay.dir, "Corpus directory")->capture_default_str();
  replay_cmd->add_option("--config", replay.config, "Replay settings (JSON)");
  replay_cmd->add_option("--seed", replay.seed, "Seed")->capture_default_str();
  replay_cmd->add_option("--out", replay.out, "Report file (default stdout)");
  replay_cmd->add_option("--telemetry", replay.telemetry, "Write raw telemetry here");
  replay_cmd->add_option("--latency-scale", replay.latency_scale,
                         "Multiply simulated latency");
  replay_cmd->add_flag("--single-line-only", replay.single_line_only,
                       "Disable multi-line suggestions");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("sim", "Serving-queue simulator");
  sim_cmd->require_subcommand(1);
  auto* sim_run = sim_cmd->add_subcommand("run", "Run one simulation");
  sim_run->add_option("--config", sim.config, "Simulation setup (JSON)");
  sim_run->add_option("--seed", sim.seed, "Seed")->capture_default_str();
  sim_run->add_option("--out", sim.out, "Report file (default stdout)");

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Aggregate telemetry sinks");
  report_cmd->add_option("--in", report.in, "Telemetry file(s)")->required();
  report_cmd->add_option("--out", report.out, "Report file (default stdout)");

  CorpusArgs corpus;
  auto* corpus_cmd =
      app.add_subcommand("corpus", "Build the mock model corpus for a ground-truth set");
  corpus_cmd->add_option("--dir", corpus.dir, "Corpus directory")->capture_default_str();
  corpus_cmd->add_option("--seed", corpus.seed, "Seed")->capture_default_str();
  corpus_cmd->add_option("--out", corpus.out,
                         "Output (default <dir>/mock_corpus.jsonl)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (*serve_cmd) return run_serve(serve, in, out);
    if (*replay_cmd) return run_replay(replay, out);
    if (*sim_run) return run_sim(sim, out);
    if (*report_cmd) return run_report(report, out, err);
    if (*corpus_cmd) return run_corpus(corpus);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace scopecomplete
