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

#ifndef GATELAB_SIM_WORLD_HPP_
#define GATELAB_SIM_WORLD_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gatelab/common.hpp"
#include "gatelab/sim/arm.hpp"

namespace gatelab::sim {

enum class TaskId { kReach2d, kPickPlace2d, kBiTransport2d, kKitchenLite };

std::string_view to_string(TaskId id);
// Throws ConfigError for unknown names.
TaskId parse_task_id(std::string_view name);

// Annular sector sampled uniformly in (r, phi) around `origin`.
struct PolarRegion {
  Vec2 origin = Vec2::Zero();
  double r_min = 0.0;
  double r_max = 0.0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  // Shift origin by (base_goal, 0); used for goals that live at the
  // destination of a mobile base.
  bool relative_to_base_goal = false;
};

struct Randomization {
  std::vector<JointLimit> start_joints;  // per joint, shared by all arms
  std::vector<PolarRegion> objects;
  std::vector<PolarRegion> goals;
  JointLimit base_goal{0.0, 0.0};
};

struct TaskSpec {
  TaskId id = TaskId::kReach2d;
  std::vector<std::string> subtask_names;
  int horizon = 0;   // steps
  double dt = 0.01;  // s
  ArmModel arm;
  std::vector<Vec2> mounts;  // arm bases relative to the (mobile) base
  bool mobile = false;
  JointLimit base_limits{0.0, 0.0};
  Randomization randomization;

  double reach_tolerance = 0.05;  // m
  double grasp_radius = 0.03;     // m
  double place_tolerance = 0.05;  // m

  // gripper aperture change per step toward the command
  double gripper_rate = 0.1;

  // action bounds
  double max_joint_delta = 0.05;  // rad per step
  double max_base_delta = 0.02;   // m per step

  // joint servo tracking the commanded set point
  Vec servo_kp;
  Vec servo_kd;

  int num_arms() const { return static_cast<int>(mounts.size()); }
  int num_subtasks() const { return static_cast<int>(subtask_names.size()); }
  bool has_gripper() const { return id != TaskId::kReach2d; }

  void validate() const;
};

// Default task definitions.
TaskSpec make_task(TaskId id);

struct ArmInstance {
  JointState joints;
  Vec setpoint;          // commanded joint positions
  double gripper = 1.0;  // aperture, 1 open / 0 closed
};

struct ObjectState {
  Vec2 position = Vec2::Zero();
  int held_by = -1;  // arm index or -1
};

// Exact (bitwise-value) comparisons, size-checked.
bool operator==(const JointState& a, const JointState& b);
bool operator==(const ArmInstance& a, const ArmInstance& b);
bool operator==(const ObjectState& a, const ObjectState& b);

struct WorldState {
  std::vector<ArmInstance> arms;
  double base_x = 0.0;
  std::vector<ObjectState> objects;
  std::vector<Vec2> goals;
  double base_goal = 0.0;
  int subtask_index = 0;
  // predicate observed true at some step, regardless of ordering
  std::vector<bool> raw_achieved;
  std::int64_t step_count = 0;
  double time = 0.0;

  bool operator==(const WorldState&) const = default;
};

// Explicit initial configuration; any field left empty is drawn from the
// task randomization.
struct Placement {
  std::optional<std::vector<Vec2>> objects;
  std::optional<std::vector<Vec2>> goals;
  std::optional<Vec> start_joints;  // applied to every arm
  std::optional<double> base_goal;
};

WorldState reset(const TaskSpec& spec, std::uint64_t seed,
                 const Placement& placement = {});

struct StepInput {
  std::vector<Vec> torques;     // per arm
  std::vector<double> gripper;  // per-arm command; empty holds the aperture
  double base_delta = 0.0;      // m, mobile tasks only
};

struct StepResult {
  WorldState world;
  bool episode_over = false;  // horizon already reached; world unchanged
};

// One semi-implicit Euler step of M qdd = tau - g(q) - D qd, then gripper
// actuation, grasp bookkeeping and subtask progress. A gripper attaches the
// nearest free object within grasp_radius once its aperture drops below 0.5
// and releases it once the aperture is back at or above 0.5.
StepResult step(const WorldState& world, const TaskSpec& spec,
                const StepInput& input, double dt);

// Per-subtask success with the cascade rule applied.
std::vector<bool> success(const WorldState& world, const TaskSpec& spec);

// Geometric predicate of subtask k on the current state, ignoring order.
bool subtask_predicate(const WorldState& world, const TaskSpec& spec, int k);

bool task_complete(const WorldState& world, const TaskSpec& spec);

// Arm mount in world coordinates.
Vec2 arm_origin(const WorldState& world, const TaskSpec& spec, int arm);
// Gripper point (end effector) in world coordinates.
Vec2 gripper_point(const WorldState& world, const TaskSpec& spec, int arm);

// Object index held by `arm`, or -1.
int held_object(const WorldState& world, int arm);

}  // namespace gatelab::sim

#endif  // GATELAB_SIM_WORLD_HPP_
