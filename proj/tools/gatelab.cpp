// Copyright 2026 The gatelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// gatelab: batch experiments, evaluation, report comparison, and the live
// teleoperation server.
//
// Exit codes: 0 ok, 1 runtime failure, 2 bad configuration or usage.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "gatelab/harness/config.hpp"
#include "gatelab/harness/dataset_io.hpp"
#include "gatelab/harness/grid.hpp"
#include "gatelab/harness/report.hpp"
#include "gatelab/harness/runner.hpp"
#include "gatelab/teleop/server.hpp"

namespace fs = std::filesystem;
using namespace gatelab;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

fs::path config_dir(const fs::path& config) {
  const fs::path parent = config.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

int cmd_run(const fs::path& config_path, int workers,
            const std::optional<fs::path>& out) {
  const harness::ExperimentConfig config = harness::load_config(config_path);
  harness::RunOptions options;
  options.workers = workers;
  options.output_dir = out;
  harness::RunArtifacts artifacts;
  const dagger::RegimeRun run = harness::run_experiment(
      config, options, &artifacts);
  const dagger::ReportRow& last = harness::last_evaluated(run.report);
  std::cout << "task " << run.report.task << " regime " << run.report.regime
            << " human_steps " << run.report.human_labeled_steps() << '\n';
  for (std::size_t k = 0; k < run.report.subtask_names.size(); ++k) {
    std::cout << "success_" << run.report.subtask_names[k] << ' '
              << last.subtask_success[k] << '\n';
  }
  std::cout << "wrote " << artifacts.dir.string() << '\n';
  return 0;
}

int cmd_eval(const fs::path& policy, const fs::path& config_path, int workers) {
  const harness::ExperimentConfig config = harness::load_config(config_path);
  const dagger::EvalResult r = harness::evaluate_policy_file(policy, config, workers);
  const sim::TaskSpec spec = config.task_spec();
  std::cout << "episodes " << r.episodes.size() << '\n';
  for (std::size_t k = 0; k < spec.subtask_names.size(); ++k) {
    std::cout << "success_" << spec.subtask_names[k] << ' ' << r.subtask_success[k]
              << '\n';
  }
  std::cout << "mean_episode_length " << r.mean_length << '\n';
  return 0;
}

int cmd_compare(const std::vector<fs::path>& paths) {
  std::vector<dagger::RegimeReport> reports;
  std::vector<std::string> labels;
  for (const fs::path& p : paths) {
    reports.push_back(harness::load_report(p));
    labels.push_back(p.string());
  }
  std::cout << harness::format_comparison(harness::compare(reports, labels));
  return 0;
}

struct ServeArgs {
  fs::path config;
  std::optional<std::string> listen;
  std::optional<int> port;
  std::optional<std::string> task;
  std::optional<fs::path> policy;
  std::optional<double> tick_hz;
  std::optional<double> snapshot_hz;
  std::optional<fs::path> record;
  std::optional<fs::path> replay;
  std::optional<fs::path> out;
  double duration = 0.0;
};

int cmd_serve(const ServeArgs& a) {
  harness::ExperimentConfig config = harness::load_config(a.config);
  if (a.task) config.task = sim::parse_task_id(*a.task);
  if (a.listen) config.serve.listen = *a.listen;
  if (a.port) config.serve.port = *a.port;
  if (a.tick_hz) config.serve.tick_hz = *a.tick_hz;
  if (a.snapshot_hz) config.serve.snapshot_hz = *a.snapshot_hz;
  if (a.policy) config.serve.policy = fs::absolute(*a.policy).string();
  if (!(config.serve.tick_hz > 0.0)) {
    throw ConfigError("serve.tick_hz", "tick_hz must be positive");
  }
  const teleop::SessionConfig session =
      teleop::make_session_config(config, config_dir(a.config));
  const fs::path out = a.out ? *a.out : harness::resolve_output_dir(config) / "serve";
  fs::create_directories(out);

  if (a.replay) {
    const teleop::Transcript t = teleop::load_transcript(*a.replay);
    if (t.task != sim::to_string(session.spec.id)) {
      throw ConfigError("task.id", "transcript was recorded on task " + t.task);
    }
    const teleop::ReplayResult r = teleop::replay(session, t);
    std::ofstream(out / "transitions.jsonl", std::ios::trunc) << r.transition_log;
    harness::write_dataset(out / "dataset.jsonl", r.saved);
    std::cout << "replayed " << t.final_tick << " ticks, " << r.saved.size()
              << " saved transitions, final mode " << to_string(r.final_mode)
              << '\n'
              << "wrote " << out.string() << '\n';
    return 0;
  }

  teleop::ServerOptions options;
  options.listen = config.serve.listen;
  options.port = config.serve.port;
  options.tick_hz = config.serve.tick_hz;
  options.queue_capacity = config.serve.queue_capacity;
  options.output_dir = out;
  options.record = a.record;
  options.config_hash = harness::config_hash(config);
  teleop::TeleopServer server(session, options);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.start();
  std::cout << "serving " << sim::to_string(session.spec.id) << " on ws://"
            << options.listen << ':' << server.port() << std::endl;
  const auto start = std::chrono::steady_clock::now();
  while (!g_interrupted) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    if (a.duration > 0.0 &&
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count() >= a.duration) {
      break;
    }
  }
  server.stop();
  std::cout << "stopped after " << server.tick() << " ticks\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gatelab: human-gated imitation learning lab"};
  app.require_subcommand(1);

  fs::path config_path;
  int workers = 1;
  std::optional<fs::path> out;

  CLI::App* run = app.add_subcommand("run", "run one experiment from a config");
  run->add_option("config", config_path, "experiment YAML")->required();
  run->add_option("--workers", workers, "evaluation threads")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "output directory (overrides output.dir)");

  fs::path policy_path;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a saved policy");
  eval->add_option("policy", policy_path, "policy file (.pol)")->required();
  eval->add_option("config", config_path, "experiment YAML")->required();
  eval->add_option("--workers", workers, "evaluation threads")->check(CLI::PositiveNumber);

  std::vector<fs::path> reports;
  CLI::App* cmp = app.add_subcommand("compare", "compare report files");
  cmp->add_option("reports", reports, "report.csv or report.jsonl files")
      ->required()
      ->expected(1, -1);

  ServeArgs serve_args;
  CLI::App* serve = app.add_subcommand("serve", "live teleoperation server");
  serve->add_option("config", serve_args.config, "experiment YAML")->required();
  serve->add_option("--listen", serve_args.listen, "bind address");
  serve->add_option("--port", serve_args.port, "TCP port, 0 for any free one");
  serve->add_option("--task", serve_args.task, "task id");
  serve->add_option("--policy", serve_args.policy, "policy driving AUTONOMOUS");
  serve->add_option("--tick-hz", serve_args.tick_hz, "physics rate");
  serve->add_option("--snapshot-hz", serve_args.snapshot_hz, "snapshot rate");
  serve->add_option("--record", serve_args.record, "write a command transcript");
  serve->add_option("--replay", serve_args.replay, "replay a transcript offline");
  serve->add_option("--out", serve_args.out, "output directory");
  serve->add_option("--duration", serve_args.duration,
                    "stop after this many seconds (0 runs until interrupted)");

  fs::path dataset_path;
  CLI::App* dataset = app.add_subcommand("dataset", "dataset utilities");
  dataset->require_subcommand(1);
  CLI::App* inspect = dataset->add_subcommand("inspect", "summarize a dataset");
  inspect->add_option("file", dataset_path, "dataset.jsonl")->required();

  std::string grid_task;
  int grid_size = 18;
  std::uint64_t grid_seed = 0;
  CLI::App* grid = app.add_subcommand("grid", "print a pinned evaluation grid");
  grid->add_option("task", grid_task, "task id")->required();
  grid->add_option("--episodes", grid_size, "number of entries")->check(CLI::PositiveNumber);
  grid->add_option("--seed", grid_seed, "first environment seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, workers, out);
    if (*eval) return cmd_eval(policy_path, config_path, workers);
    if (*cmp) return cmd_compare(reports);
    if (*serve) return cmd_serve(serve_args);
    if (*grid) {
      const sim::TaskSpec spec = sim::make_task(sim::parse_task_id(grid_task));
      std::cout << harness::format_grid(harness::make_grid(spec, grid_size, grid_seed));
      return 0;
    }
    if (*inspect) {
      std::cout << harness::inspect_dataset(dataset_path);
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    if (!e.field().empty()) std::cerr << " at " << e.field();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    std::cerr << ": " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
