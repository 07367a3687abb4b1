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

#ifndef GATELAB_DAGGER_REGIME_HPP_
#define GATELAB_DAGGER_REGIME_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gatelab/dagger/rollout.hpp"

namespace gatelab::dagger {

enum class Regime { kOfflineBc, kContinualDagger, kBatchedDagger };

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view name);

struct RegimeConfig {
  Regime regime = Regime::kBatchedDagger;
  int warmup_demos = 10;
  int dagger_iterations = 4;
  int episodes_per_iteration = 5;
  policy::TrainConfig train;
  // Training config for the from-scratch retrain of BATCHED_DAGGER; defaults
  // to `train` when unset.
  std::optional<policy::TrainConfig> retrain;
  // Gradient steps of each DAgger finetune; defaults to train.grad_steps.
  std::optional<int> finetune_steps;
  // Learning rate of each finetune; defaults to train.learning_rate.
  std::optional<double> finetune_learning_rate;
  GateConfig gate;
  ScriptedExpert expert;
  int eval_episodes = 50;
  std::uint64_t eval_seed = 1'000'000;
  std::uint64_t master_seed = 0;
  // OFFLINE_BC only: collect expert episodes until this many steps (0 = use
  // warmup_demos episodes).
  std::int64_t human_step_budget = 0;
  // Evaluate the intermediate policies of the DAgger phase.
  bool eval_each_iteration = true;
  int workers = 1;
  // Fixed evaluation configurations; replaces the seed range when set.
  std::optional<EvalGrid> eval_grid;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// One row per evaluated stage, ordered by iteration.
struct ReportRow {
  int iteration = 0;
  std::string phase;  // offline | warmup | dagger | retrain
  std::int64_t dataset_size = 0;
  std::int64_t human_labeled_steps = 0;  // cumulative
  double intervention_fraction = 0.0;
  std::vector<double> subtask_success;   // empty when not evaluated
  double mean_episode_length = 0.0;
  double wall_clock_s = 0.0;             // informational
};

struct RegimeReport {
  int schema_version = 1;
  std::string config_hash;
  std::string task;
  std::string regime;
  std::uint64_t master_seed = 0;
  std::uint64_t eval_seed = 0;
  int eval_episodes = 0;
  // Hash of the evaluation grid file; empty for a plain seed range.
  std::string eval_grid_hash;
  std::vector<std::string> subtask_names;
  int warmup_discarded = 0;
  std::vector<ReportRow> rows;

  const ReportRow& final_row() const { return rows.back(); }
  std::int64_t human_labeled_steps() const {
    return rows.empty() ? 0 : rows.back().human_labeled_steps;
  }
};

struct RegimeRun {
  RegimeReport report;
  policy::Policy policy;
  Dataset dataset;
  // The continually fine-tuned policy that preceded the batched retrain
  // (BATCHED_DAGGER only).
  std::optional<policy::Policy> continual_policy;
};

using RowCallback = std::function<void(const ReportRow&)>;

// Seed of the k-th training call of a run; BATCHED_DAGGER's retrain reuses
// the warmup seed so a zero-iteration run reproduces OFFLINE_BC.
std::uint64_t train_seed(const RegimeConfig& config, int call);
// Base environment seed of DAgger iteration i (episodes use base + e).
std::uint64_t iteration_seed(const RegimeConfig& config, int iteration);

RegimeRun run_regime(const RegimeConfig& config, const sim::TaskSpec& spec,
                     const RowCallback& on_row = {});

}  // namespace gatelab::dagger

#endif  // GATELAB_DAGGER_REGIME_HPP_
