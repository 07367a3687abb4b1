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

#include "gatelab/dagger/rollout.hpp"

#include <numeric>
#include <stdexcept>

#include "gatelab/dagger/env.hpp"
#include "gatelab/dagger/parallel.hpp"

namespace gatelab::dagger {
namespace {

constexpr int kWarmupRetries = 3;
constexpr std::uint64_t kRetryStride = 1ULL << 32;

struct ExpertEpisode {
  Dataset transitions;
  bool success = false;
};

ExpertEpisode expert_episode(const sim::TaskSpec& spec,
                             const ScriptedExpert& expert, std::uint64_t seed,
                             std::int64_t episode_index) {
  ExpertEpisode out;
  sim::WorldState world = sim::reset(spec, seed);
  while (!sim::task_complete(world, spec) && world.step_count < spec.horizon) {
    const Vec action = finalize_action(expert_action(expert, world, spec), spec);
    out.transitions.push_back({episode_index, world.step_count, spec.id,
                               observe(world, spec), action, Source::kHuman,
                               Mode::kTeleop});
    world = apply_action(world, spec, action).world;
  }
  out.success = sim::task_complete(world, spec);
  return out;
}

struct GatedEpisode {
  Dataset labels;  // HUMAN transitions with expert labels
  Dataset log;
  std::int64_t steps = 0;
  std::int64_t intervened = 0;
  bool success = false;
};

GatedEpisode gated_episode(const policy::Policy& policy,
                           const sim::TaskSpec& spec,
                           const ScriptedExpert& expert, const GateConfig& gate,
                           std::uint64_t seed, std::int64_t episode_index) {
  GatedEpisode out;
  sim::WorldState world = sim::reset(spec, seed);
  int hold_remaining = 0;
  while (!sim::task_complete(world, spec) && world.step_count < spec.horizon) {
    const Vec obs = observe(world, spec);
    const Vec a_policy = finalize_action(policy::predict(policy, obs), spec);
    const Vec a_expert = finalize_action(expert_action(expert, world, spec), spec);

    bool intervene = false;
    if (hold_remaining > 0) {
      intervene = true;
      --hold_remaining;
    } else if (scripted_gate(a_policy, a_expert, gate) ==
               GateDecision::kIntervene) {
      intervene = true;
      hold_remaining = gate.min_hold - 1;
    }

    Vec executed;
    if (intervene) {
      executed = blended_action(a_policy, a_expert, gate.lambda);
      Transition t{episode_index, world.step_count, spec.id, obs, a_expert,
                   Source::kHuman, Mode::kTakeover};
      out.labels.push_back(t);
      out.log.push_back(std::move(t));
      ++out.intervened;
    } else {
      executed = a_policy;
      out.log.push_back({episode_index, world.step_count, spec.id, obs,
                         a_policy, Source::kPolicy, Mode::kAutonomous});
    }
    ++out.steps;
    world = apply_action(world, spec, executed).world;
  }
  out.success = sim::task_complete(world, spec);
  return out;
}

}  // namespace

Controller policy_controller(const policy::Policy& policy) {
  return [policy](const sim::WorldState&, const Vec& obs) {
    return policy::predict(policy, obs);
  };
}

Controller expert_controller(const ScriptedExpert& expert,
                             const sim::TaskSpec& spec) {
  return [expert, spec](const sim::WorldState& world, const Vec&) {
    return expert_action(expert, world, spec);
  };
}

EpisodeOutcome run_episode(const Controller& controller,
                           const sim::TaskSpec& spec, const GridEntry& entry) {
  sim::WorldState world = sim::reset(spec, entry.seed, entry.placement);
  while (!sim::task_complete(world, spec) && world.step_count < spec.horizon) {
    world = apply_action(world, spec, controller(world, observe(world, spec))).world;
  }
  return {sim::success(world, spec), static_cast<int>(world.step_count)};
}

EvalGrid seed_grid(int n_episodes, std::uint64_t seed) {
  EvalGrid grid(n_episodes);
  for (int i = 0; i < n_episodes; ++i) grid[i].seed = seed + i;
  return grid;
}

EvalResult evaluate_controller(const Controller& controller,
                               const sim::TaskSpec& spec, const EvalGrid& grid,
                               int workers) {
  require(!grid.empty(), "evaluate: n_episodes must be >= 1");
  EvalResult result;
  result.episodes.resize(grid.size());
  parallel_for(static_cast<int>(grid.size()), workers, [&](int i) {
    result.episodes[i] = run_episode(controller, spec, grid[i]);
  });
  const int n_sub = spec.num_subtasks();
  result.subtask_success.assign(n_sub, 0.0);
  double length = 0.0;
  for (const EpisodeOutcome& e : result.episodes) {
    for (int k = 0; k < n_sub; ++k) result.subtask_success[k] += e.success[k];
    length += e.length;
  }
  const double n = static_cast<double>(grid.size());
  for (double& s : result.subtask_success) s /= n;
  result.mean_length = length / n;
  return result;
}

EvalResult evaluate(const policy::Policy& policy, const sim::TaskSpec& spec,
                    const EvalGrid& grid, int workers) {
  return evaluate_controller(policy_controller(policy), spec, grid, workers);
}

EvalResult evaluate(const policy::Policy& policy, const sim::TaskSpec& spec,
                    int n_episodes, std::uint64_t seed, int workers) {
  return evaluate(policy, spec, seed_grid(n_episodes, seed), workers);
}

WarmupResult collect_warmup(const sim::TaskSpec& spec,
                            const ScriptedExpert& expert, int episodes,
                            std::uint64_t seed, std::int64_t step_budget) {
  if (step_budget <= 0 && episodes < 1) {
    throw std::invalid_argument("collect_warmup: need at least one episode");
  }
  WarmupResult out;
  for (std::int64_t k = 0;; ++k) {
    if (step_budget > 0) {
      if (static_cast<std::int64_t>(out.dataset.size()) >= step_budget) break;
    } else if (k >= episodes) {
      break;
    }
    bool kept = false;
    for (int attempt = 0; attempt <= kWarmupRetries; ++attempt) {
      const std::uint64_t episode_seed = seed + k + attempt * kRetryStride;
      ExpertEpisode e = expert_episode(spec, expert, episode_seed, k);
      if (e.success) {
        out.dataset.insert(out.dataset.end(), e.transitions.begin(),
                           e.transitions.end());
        kept = true;
        break;
      }
      ++out.discarded;
    }
    if (!kept) {
      throw std::runtime_error("collect_warmup: expert failed episode " +
                               std::to_string(k) + " after retries");
    }
    ++out.episodes;
  }
  return out;
}

IterationResult run_dagger_iteration(const policy::Policy& policy,
                                     Dataset dataset, const sim::TaskSpec& spec,
                                     const ScriptedExpert& expert,
                                     const GateConfig& gate,
                                     const policy::TrainConfig& train,
                                     const IterationOptions& options) {
  gate.validate();
  if (gate.expert != ExpertKind::kScripted) {
    throw ConfigError("gate.expert",
                      "batch DAgger iterations need the scripted expert; "
                      "human intervention runs through `serve`");
  }
  std::vector<GatedEpisode> episodes(options.episodes);
  parallel_for(options.episodes, options.workers, [&](int e) {
    episodes[e] = gated_episode(policy, spec, expert, gate, options.seed + e,
                                options.first_episode + e);
  });

  IterationResult result;
  for (GatedEpisode& e : episodes) {
    result.metrics.episodes += 1;
    result.metrics.steps += e.steps;
    result.metrics.intervened_steps += e.intervened;
    result.metrics.successes += e.success ? 1 : 0;
    result.metrics.human_labels_added += static_cast<std::int64_t>(e.labels.size());
    dataset.insert(dataset.end(), e.labels.begin(), e.labels.end());
    result.rollout_log.insert(result.rollout_log.end(), e.log.begin(), e.log.end());
  }
  result.policy = options.finetune ? policy::finetune(policy, dataset, train) : policy;
  result.dataset = std::move(dataset);
  return result;
}

}  // namespace gatelab::dagger
