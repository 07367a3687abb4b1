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

#include "gatelab/dagger/regime.hpp"

#include <chrono>
#include <string>

#include "gatelab/rng.hpp"

namespace gatelab::dagger {
namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

EvalGrid eval_grid_for(const RegimeConfig& config) {
  return config.eval_grid ? *config.eval_grid
                          : seed_grid(config.eval_episodes, config.eval_seed);
}

void fill_eval(ReportRow* row, const EvalResult& eval) {
  row->subtask_success = eval.subtask_success;
  row->mean_episode_length = eval.mean_length;
}

policy::TrainConfig with_seed(policy::TrainConfig config, std::uint64_t seed) {
  config.seed = seed;
  return config;
}

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::kOfflineBc: return "OFFLINE_BC";
    case Regime::kContinualDagger: return "CONTINUAL_DAGGER";
    case Regime::kBatchedDagger: return "BATCHED_DAGGER";
  }
  return "OFFLINE_BC";
}

Regime parse_regime(std::string_view name) {
  for (Regime r : {Regime::kOfflineBc, Regime::kContinualDagger,
                   Regime::kBatchedDagger}) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError("regime.kind", "unknown regime '" + std::string(name) + "'");
}

void RegimeConfig::validate() const {
  train.validate();
  if (retrain) retrain->validate();
  gate.validate();
  if (warmup_demos < 1 && !(regime == Regime::kOfflineBc && human_step_budget > 0)) {
    throw ConfigError("regime.warmup_demos", "warmup_demos must be >= 1");
  }
  if (finetune_steps && *finetune_steps < 0) {
    throw ConfigError("train.finetune_steps", "must be >= 0");
  }
  if (finetune_learning_rate && !(*finetune_learning_rate > 0)) {
    throw ConfigError("train.finetune_learning_rate", "must be positive");
  }
  if (dagger_iterations < 0) {
    throw ConfigError("regime.dagger_iterations", "must be >= 0");
  }
  if (regime == Regime::kOfflineBc && dagger_iterations != 0) {
    throw ConfigError("regime.dagger_iterations",
                      "OFFLINE_BC requires dagger_iterations = 0");
  }
  if (regime != Regime::kOfflineBc && dagger_iterations > 0 &&
      episodes_per_iteration < 1) {
    throw ConfigError("regime.episodes_per_iteration", "must be >= 1");
  }
  if (regime != Regime::kOfflineBc && human_step_budget != 0) {
    throw ConfigError("regime.human_step_budget",
                      "step budgets apply to OFFLINE_BC only");
  }
  if (regime != Regime::kOfflineBc && gate.expert != ExpertKind::kScripted) {
    throw ConfigError("gate.expert",
                      "batch runs need the scripted expert; use `serve` for "
                      "human interventions");
  }
  if (!eval_grid && eval_episodes < 1) {
    throw ConfigError("regime.eval_episodes", "eval_episodes must be >= 1");
  }
  if (workers < 1) throw ConfigError("--workers", "workers must be >= 1");
}

std::uint64_t train_seed(const RegimeConfig& config, int call) {
  return derive_seed(config.master_seed ^ config.train.seed,
                     0x7a11 + static_cast<std::uint64_t>(call));
}

std::uint64_t iteration_seed(const RegimeConfig& config, int iteration) {
  // well away from the warmup range master_seed + k
  return derive_seed(config.master_seed, 0xda66e5 + static_cast<std::uint64_t>(iteration));
}

RegimeRun run_regime(const RegimeConfig& config, const sim::TaskSpec& spec,
                     const RowCallback& on_row) {
  config.validate();
  spec.validate();

  RegimeRun run;
  RegimeReport& report = run.report;
  report.task = std::string(sim::to_string(spec.id));
  report.regime = std::string(to_string(config.regime));
  report.master_seed = config.master_seed;
  report.eval_seed = config.eval_seed;
  const EvalGrid grid = eval_grid_for(config);
  report.eval_episodes = static_cast<int>(grid.size());
  report.subtask_names = spec.subtask_names;

  auto emit = [&](ReportRow row) {
    report.rows.push_back(std::move(row));
    if (on_row) on_row(report.rows.back());
  };

  Stopwatch clock;
  const std::int64_t budget =
      config.regime == Regime::kOfflineBc ? config.human_step_budget : 0;
  WarmupResult warmup = collect_warmup(spec, config.expert, config.warmup_demos,
                                       config.master_seed, budget);
  report.warmup_discarded = warmup.discarded;
  Dataset dataset = std::move(warmup.dataset);
  std::int64_t next_episode = warmup.episodes;

  policy::Policy current =
      policy::train_bc(dataset, with_seed(config.train, train_seed(config, 0)));

  ReportRow first;
  first.iteration = 0;
  first.phase = config.regime == Regime::kOfflineBc ? "offline" : "warmup";
  first.dataset_size = static_cast<std::int64_t>(dataset.size());
  first.human_labeled_steps = first.dataset_size;
  if (config.regime == Regime::kOfflineBc || config.eval_each_iteration ||
      config.dagger_iterations == 0) {
    fill_eval(&first, evaluate(current, spec, grid, config.workers));
  }
  first.wall_clock_s = clock.seconds();
  emit(first);

  policy::TrainConfig finetune_config = config.train;
  if (config.finetune_steps) finetune_config.grad_steps = *config.finetune_steps;
  if (config.finetune_learning_rate) {
    finetune_config.learning_rate = *config.finetune_learning_rate;
  }
  for (int i = 1; i <= config.dagger_iterations; ++i) {
    IterationOptions options;
    options.episodes = config.episodes_per_iteration;
    options.seed = iteration_seed(config, i);
    options.first_episode = next_episode;
    options.workers = config.workers;
    IterationResult it = run_dagger_iteration(
        current, std::move(dataset), spec, config.expert, config.gate,
        with_seed(finetune_config, train_seed(config, i)), options);
    next_episode += config.episodes_per_iteration;
    current = std::move(it.policy);
    dataset = std::move(it.dataset);

    ReportRow row;
    row.iteration = i;
    row.phase = "dagger";
    row.dataset_size = static_cast<std::int64_t>(dataset.size());
    row.human_labeled_steps = row.dataset_size;
    row.intervention_fraction = it.metrics.intervention_fraction();
    const bool last = i == config.dagger_iterations;
    if (config.eval_each_iteration ||
        (last && config.regime == Regime::kContinualDagger)) {
      fill_eval(&row, evaluate(current, spec, grid, config.workers));
    }
    row.wall_clock_s = clock.seconds();
    emit(row);
  }

  if (config.regime == Regime::kBatchedDagger) {
    run.continual_policy = current;
    const policy::TrainConfig retrain = config.retrain.value_or(config.train);
    current = policy::train_bc(dataset, with_seed(retrain, train_seed(config, 0)));
    ReportRow row;
    row.iteration = config.dagger_iterations + 1;
    row.phase = "retrain";
    row.dataset_size = static_cast<std::int64_t>(dataset.size());
    row.human_labeled_steps = row.dataset_size;
    fill_eval(&row, evaluate(current, spec, grid, config.workers));
    row.wall_clock_s = clock.seconds();
    emit(row);
  }

  run.policy = std::move(current);
  run.dataset = std::move(dataset);
  return run;
}

}  // namespace gatelab::dagger
