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

#ifndef GATELAB_TELEOP_SESSION_HPP_
#define GATELAB_TELEOP_SESSION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gatelab/bilateral/coupling.hpp"
#include "gatelab/dagger/rollout.hpp"
#include "gatelab/dagger/transition.hpp"
#include "gatelab/sim/world.hpp"
#include "gatelab/teleop/protocol.hpp"

namespace gatelab::teleop {

struct SessionConfig {
  sim::TaskSpec spec;
  bilateral::GainProfile gains;
  // Drives the follower in AUTONOMOUS; maps (world, obs) to a raw action.
  dagger::Controller controller;
  std::uint64_t seed = 0;   // episode e resets with seed + e
  int snapshot_every = 5;   // ticks between periodic snapshots
  double hand_kp = 30.0;    // operator's grip on the leader, N m / rad
};

struct ArmView {
  Vec q, qd, setpoint;
  double gripper = 1.0;
  Vec leader_q, leader_qd;
  Vec leader_torque;  // coupling torque felt by the operator
};

struct Snapshot {
  std::int64_t tick = 0;
  Mode mode = Mode::kIdle;
  std::int64_t episode = 0;
  std::int64_t step = 0;
  bool intervention = false;  // a human is driving the follower
  std::vector<ArmView> arms;
  double base_x = 0.0;
  double base_goal = 0.0;
  std::vector<sim::ObjectState> objects;
  std::vector<Vec2> goals;
  std::vector<bool> subtasks;
  bool episode_over = false;
  std::int64_t buffered = 0;  // recorded but neither saved nor discarded
  std::int64_t saved = 0;     // transitions flushed by SAVE so far
  std::int64_t dropped_events = 0;
  std::int64_t last_event_tick = -1;  // client tick of the newest command
};

std::string format_snapshot(const Snapshot& snapshot);

// Single-owner session state. tick() applies the commands at the tick
// boundary in the given order, then advances physics one step.
class Session {
 public:
  explicit Session(SessionConfig config);

  struct TickResult {
    std::optional<Snapshot> snapshot;  // periodic or on a mode/data change
    Dataset saved;                     // flushed by SAVE during this tick
    std::vector<Transition> recorded;  // appended to the buffer this tick
  };

  TickResult tick(const std::vector<Command>& commands);

  Snapshot snapshot() const;
  Mode mode() const { return mode_; }
  std::int64_t tick_count() const { return tick_; }
  const sim::WorldState& world() const { return world_; }
  const std::vector<sim::JointState>& leaders() const { return leaders_; }
  // Leader state at the start of the most recent tick, after commands.
  const std::vector<sim::JointState>& leaders_at_tick_start() const {
    return leaders_at_start_;
  }
  const Dataset& buffer() const { return buffer_; }
  bool unsaved() const { return !buffer_.empty(); }
  const SessionConfig& config() const { return config_; }

  void set_dropped_events(std::int64_t n) { dropped_ = n; }

 private:
  void apply(const Command& command, TickResult* out);
  void reset_episode();
  Vec hand_torque(int arm) const;
  bool episode_over() const;

  SessionConfig config_;
  Mode mode_ = Mode::kIdle;
  std::int64_t tick_ = 0;
  std::int64_t episode_ = 0;
  sim::WorldState world_;
  std::vector<sim::JointState> leaders_;
  std::vector<sim::JointState> leaders_at_start_;
  std::vector<Vec> leader_torques_;
  std::vector<std::optional<Vec>> hand_targets_;  // engaged when set
  std::vector<double> human_gripper_;
  bool pending_grab_ = false;
  Dataset buffer_;
  std::int64_t saved_ = 0;
  std::int64_t dropped_ = 0;
  std::int64_t last_event_tick_ = -1;
};

}  // namespace gatelab::teleop

#endif  // GATELAB_TELEOP_SESSION_HPP_
