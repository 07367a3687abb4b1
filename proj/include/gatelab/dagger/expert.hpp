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

#ifndef GATELAB_DAGGER_EXPERT_HPP_
#define GATELAB_DAGGER_EXPERT_HPP_

#include <vector>

#include "gatelab/common.hpp"
#include "gatelab/sim/world.hpp"

namespace gatelab::dagger {

enum class GripIntent { kNone, kGrasp, kCarry, kRelease, kOpen };

// Current target of one arm in the task's waypoint plan.
struct Waypoint {
  int arm = 0;
  Vec2 target = Vec2::Zero();
  // Point the gripper decision measures against; differs from target only
  // while the base is still carrying the arm toward it.
  Vec2 grip_ref = Vec2::Zero();
  GripIntent grip = GripIntent::kNone;
  int subtask = 0;
  bool hold = false;  // keep the current set point
};

// Scripted stand-in for the human expert: proportional joint-space steps,
// softly saturated at the action bound, toward IK solutions of the active
// waypoint. Stateless; the active waypoint
// is a function of the world (held objects, subtask index, base position).
struct ScriptedExpert {
  double joint_gain = 0.5;         // fraction of joint error per step
  double close_radius = 0.08;      // m, close while approaching an object
  double release_radius = 0.045;   // m, open when this close to the target
  double base_gain = 0.5;
  double base_tolerance = 0.01;    // m
};

// Active waypoint per arm.
std::vector<Waypoint> active_waypoints(const sim::WorldState& world,
                                       const sim::TaskSpec& spec,
                                       const ScriptedExpert& expert = {});

Vec expert_action(const ScriptedExpert& expert, const sim::WorldState& world,
                  const sim::TaskSpec& spec);

}  // namespace gatelab::dagger

#endif  // GATELAB_DAGGER_EXPERT_HPP_
