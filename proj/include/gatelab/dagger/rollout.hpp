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

#ifndef GATELAB_DAGGER_ROLLOUT_HPP_
#define GATELAB_DAGGER_ROLLOUT_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "gatelab/dagger/expert.hpp"
#include "gatelab/dagger/gate.hpp"
#include "gatelab/dagger/transition.hpp"
#include "gatelab/policy/mlp.hpp"
#include "gatelab/sim/world.hpp"

namespace gatelab::dagger {

// Maps (world, observation) to a raw action; finalized by the environment.
using Controller = std::function<Vec(const sim::WorldState&, const Vec&)>;

Controller policy_controller(const policy::Policy& policy);
Controller expert_controller(const ScriptedExpert& expert,
                             const sim::TaskSpec& spec);

// One evaluation configuration: an environment seed plus optional explicit
// placement (a "predetermined location").
struct GridEntry {
  std::uint64_t seed = 0;
  sim::Placement placement;
};
using EvalGrid = std::vector<GridEntry>;

struct EpisodeOutcome {
  std::vector<bool> success;  // cascaded, per subtask
  int length = 0;
};

// Runs until every subtask succeeds or the horizon is reached.
EpisodeOutcome run_episode(const Controller& controller,
                           const sim::TaskSpec& spec, const GridEntry& entry);

struct EvalResult {
  std::vector<double> subtask_success;  // rate per subtask
  double mean_length = 0.0;
  std::vector<EpisodeOutcome> episodes;

  double full_success() const {
    return subtask_success.empty() ? 0.0 : subtask_success.back();
  }
};

EvalResult evaluate_controller(const Controller& controller,
                               const sim::TaskSpec& spec, const EvalGrid& grid,
                               int workers = 1);

// Autonomous evaluation on seeds seed .. seed + n - 1.
EvalResult evaluate(const policy::Policy& policy, const sim::TaskSpec& spec,
                    int n_episodes, std::uint64_t seed, int workers = 1);
// Autonomous evaluation on an explicit grid.
EvalResult evaluate(const policy::Policy& policy, const sim::TaskSpec& spec,
                    const EvalGrid& grid, int workers = 1);

EvalGrid seed_grid(int n_episodes, std::uint64_t seed);

struct WarmupResult {
  Dataset dataset;
  int episodes = 0;
  int discarded = 0;  // failed expert episodes that were re-drawn
};

// K expert episodes on seeds seed + k; a failed episode is re-drawn up to
// three times. With step_budget > 0, whole episodes are collected until the
// total step count reaches the budget (K is then ignored).
WarmupResult collect_warmup(const sim::TaskSpec& spec,
                            const ScriptedExpert& expert, int episodes,
                            std::uint64_t seed, std::int64_t step_budget = 0);

struct IterationMetrics {
  int episodes = 0;
  std::int64_t steps = 0;
  std::int64_t intervened_steps = 0;
  int successes = 0;
  std::int64_t human_labels_added = 0;

  double intervention_fraction() const {
    return steps == 0 ? 0.0 : static_cast<double>(intervened_steps) / steps;
  }
};

struct IterationResult {
  policy::Policy policy;
  Dataset dataset;
  IterationMetrics metrics;
  // Every executed step, HUMAN and POLICY, for analysis only.
  Dataset rollout_log;
};

struct IterationOptions {
  int episodes = 1;
  std::uint64_t seed = 0;           // episode e runs on seed + e
  std::int64_t first_episode = 0;   // episode numbering in the dataset
  int workers = 1;
  bool finetune = true;             // false leaves the policy untouched
};

// Gated rollouts with the current policy, aggregation of expert labels on
// intervened steps, then finetune on the full aggregated dataset.
IterationResult run_dagger_iteration(const policy::Policy& policy,
                                     Dataset dataset, const sim::TaskSpec& spec,
                                     const ScriptedExpert& expert,
                                     const GateConfig& gate,
                                     const policy::TrainConfig& train,
                                     const IterationOptions& options);

}  // namespace gatelab::dagger

#endif  // GATELAB_DAGGER_ROLLOUT_HPP_
