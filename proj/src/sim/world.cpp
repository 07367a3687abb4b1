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

#include "gatelab/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gatelab/rng.hpp"

namespace gatelab::sim {
namespace {

constexpr double kGripperThreshold = 0.5;

PolarRegion polar(double r_min, double r_max, double phi_min, double phi_max,
                  Vec2 origin = Vec2::Zero(), bool base_goal = false) {
  return {origin, r_min, r_max, phi_min, phi_max, base_goal};
}

Vec2 sample(const PolarRegion& region, double base_goal, CounterRng& rng) {
  const double r = rng.uniform(region.r_min, region.r_max);
  const double phi = rng.uniform(region.phi_min, region.phi_max);
  Vec2 origin = region.origin;
  if (region.relative_to_base_goal) origin.x() += base_goal;
  return origin + r * Vec2(std::cos(phi), std::sin(phi));
}

bool same_vec(const Vec& a, const Vec& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

}  // namespace

bool operator==(const JointState& a, const JointState& b) {
  return same_vec(a.positions, b.positions) &&
         same_vec(a.velocities, b.velocities);
}

bool operator==(const ArmInstance& a, const ArmInstance& b) {
  return a.joints == b.joints && same_vec(a.setpoint, b.setpoint) &&
         a.gripper == b.gripper;
}

bool operator==(const ObjectState& a, const ObjectState& b) {
  return a.position == b.position && a.held_by == b.held_by;
}

std::string_view to_string(TaskId id) {
  switch (id) {
    case TaskId::kReach2d: return "reach2d";
    case TaskId::kPickPlace2d: return "pickplace2d";
    case TaskId::kBiTransport2d: return "bitransport2d";
    case TaskId::kKitchenLite: return "kitchen_lite";
  }
  return "unknown";
}

TaskId parse_task_id(std::string_view name) {
  for (TaskId id : {TaskId::kReach2d, TaskId::kPickPlace2d,
                    TaskId::kBiTransport2d, TaskId::kKitchenLite}) {
    if (to_string(id) == name) return id;
  }
  throw ConfigError("task.id", "unknown task id '" + std::string(name) + "'");
}

void TaskSpec::validate() const {
  arm.validate();
  require(horizon > 0, "task: horizon must be positive");
  require(dt > 0, "task: dt must be positive");
  require(!mounts.empty(), "task: no arms");
  if (id == TaskId::kKitchenLite) {
    require(num_subtasks() >= 3, "task: kitchen_lite needs >= 3 subtasks");
  } else {
    require(num_subtasks() == 1, "task: single-stage task needs 1 subtask");
  }
  require(randomization.start_joints.size() ==
              static_cast<std::size_t>(arm.dof()),
          "task: start joint ranges must cover every joint");
  require(servo_kp.size() == arm.dof() && servo_kd.size() == arm.dof(),
          "task: servo gain size mismatch");
  require(gripper_rate > 0 && gripper_rate <= 1,
          "task: gripper_rate must lie in (0, 1]");
  require(max_joint_delta > 0 && max_base_delta >= 0,
          "task: action bounds must be positive");
}

TaskSpec make_task(TaskId id) {
  TaskSpec spec;
  spec.id = id;
  spec.dt = 0.01;
  spec.arm = ArmModel::two_link();
  spec.mounts = {Vec2::Zero()};
  spec.randomization.start_joints = {{-0.4, 0.4}, {0.8, 1.4}};
  spec.servo_kp = Vec(2);
  spec.servo_kp << 300.0, 100.0;
  spec.servo_kd =
      2.0 * spec.servo_kp.cwiseProduct(spec.arm.inertia).cwiseSqrt();

  Randomization& rnd = spec.randomization;
  switch (id) {
    case TaskId::kReach2d:
      spec.subtask_names = {"reach"};
      spec.horizon = 150;
      rnd.goals = {polar(0.8, 1.7, -0.6, 1.4)};
      break;
    case TaskId::kPickPlace2d:
      spec.subtask_names = {"place"};
      spec.horizon = 300;
      rnd.objects = {polar(1.2, 1.5, -0.5, -0.1)};
      rnd.goals = {polar(1.1, 1.4, 0.8, 1.2)};
      break;
    case TaskId::kBiTransport2d: {
      spec.subtask_names = {"transport"};
      spec.horizon = 500;
      spec.mobile = true;
      spec.base_limits = {-0.5, 3.5};
      const Vec2 left(-1.0, 0.0), right(1.0, 0.0);
      spec.mounts = {left, right};
      rnd.base_goal = {1.8, 2.2};
      rnd.objects = {polar(1.2, 1.4, -0.7, -0.4, left),
                     polar(1.2, 1.4, -0.7, -0.4, right)};
      rnd.goals = {polar(1.1, 1.3, 0.7, 1.0, left, true),
                   polar(1.1, 1.3, 0.7, 1.0, right, true)};
      break;
    }
    case TaskId::kKitchenLite:
      spec.subtask_names = {"open_lid", "pick_ball", "place_in_pot"};
      spec.horizon = 500;
      // object 0 is the lid (starts on the pot), object 1 the ball;
      // goal 0 is the pot, goal 1 the lid rest
      rnd.objects = {polar(0.0, 0.0, 0.0, 0.0), polar(1.2, 1.5, -0.5, -0.1)};
      rnd.goals = {polar(1.2, 1.4, 0.6, 0.9), polar(1.0, 1.2, 1.6, 1.9)};
      break;
  }
  return spec;
}

WorldState reset(const TaskSpec& spec, std::uint64_t seed,
                 const Placement& placement) {
  const CounterRng root(seed, static_cast<std::uint64_t>(spec.id));
  CounterRng joint_rng = root.split(1);
  CounterRng base_rng = root.split(2);
  CounterRng goal_rng = root.split(3);
  CounterRng object_rng = root.split(4);

  WorldState world;
  const int dof = spec.arm.dof();
  for (int a = 0; a < spec.num_arms(); ++a) {
    Vec q(dof);
    for (int j = 0; j < dof; ++j) {
      const JointLimit& r = spec.randomization.start_joints[j];
      q[j] = joint_rng.uniform(r.min, r.max);
    }
    if (placement.start_joints) {
      require(placement.start_joints->size() == dof,
              "reset: start joint override has wrong size");
      q = *placement.start_joints;
    }
    q = clamp_to_limits(spec.arm, q);
    world.arms.push_back({JointState::at_rest(q), q, 1.0});
  }

  if (spec.mobile) {
    const JointLimit& r = spec.randomization.base_goal;
    world.base_goal = base_rng.uniform(r.min, r.max);
  }
  if (placement.base_goal) world.base_goal = *placement.base_goal;

  for (const PolarRegion& region : spec.randomization.goals) {
    world.goals.push_back(sample(region, world.base_goal, goal_rng));
  }
  if (placement.goals) {
    require(placement.goals->size() == world.goals.size(),
            "reset: goal override has wrong size");
    world.goals = *placement.goals;
  }

  for (const PolarRegion& region : spec.randomization.objects) {
    world.objects.push_back({sample(region, world.base_goal, object_rng), -1});
  }
  if (spec.id == TaskId::kKitchenLite) world.objects[0].position = world.goals[0];
  if (placement.objects) {
    require(placement.objects->size() == world.objects.size(),
            "reset: object override has wrong size");
    for (std::size_t i = 0; i < world.objects.size(); ++i) {
      world.objects[i].position = (*placement.objects)[i];
    }
  }

  world.raw_achieved.assign(spec.num_subtasks(), false);
  return world;
}

Vec2 arm_origin(const WorldState& world, const TaskSpec& spec, int arm) {
  Vec2 origin = spec.mounts.at(arm);
  origin.x() += world.base_x;
  return origin;
}

Vec2 gripper_point(const WorldState& world, const TaskSpec& spec, int arm) {
  return arm_origin(world, spec, arm) +
         forward_kinematics(spec.arm, world.arms.at(arm).joints);
}

int held_object(const WorldState& world, int arm) {
  for (std::size_t i = 0; i < world.objects.size(); ++i) {
    if (world.objects[i].held_by == arm) return static_cast<int>(i);
  }
  return -1;
}

bool subtask_predicate(const WorldState& world, const TaskSpec& spec, int k) {
  auto placed = [&](int object, int goal) {
    const ObjectState& o = world.objects.at(object);
    return o.held_by < 0 &&
           (o.position - world.goals.at(goal)).norm() < spec.place_tolerance;
  };
  switch (spec.id) {
    case TaskId::kReach2d:
      return (gripper_point(world, spec, 0) - world.goals.at(0)).norm() <
             spec.reach_tolerance;
    case TaskId::kPickPlace2d:
      return placed(0, 0);
    case TaskId::kBiTransport2d:
      return placed(0, 0) && placed(1, 1);
    case TaskId::kKitchenLite:
      switch (k) {
        case 0: return placed(0, 1);
        case 1: return world.objects.at(1).held_by >= 0;
        case 2: return placed(1, 0);
        default: return false;
      }
  }
  return false;
}

StepResult step(const WorldState& world, const TaskSpec& spec,
                const StepInput& input, double dt) {
  require(dt > 0, "step: dt must be positive");
  require(input.torques.size() == world.arms.size(),
          "step: one torque vector per arm required");
  require(input.gripper.empty() || input.gripper.size() == world.arms.size(),
          "step: gripper command count mismatch");
  if (world.step_count >= spec.horizon) return {world, true};

  WorldState next = world;
  const ArmModel& model = spec.arm;
  for (std::size_t a = 0; a < next.arms.size(); ++a) {
    next.arms[a].joints =
        integrate(model, next.arms[a].joints, input.torques[a], dt);
    if (!input.gripper.empty()) {
      const double command = std::clamp(input.gripper[a], 0.0, 1.0);
      double& aperture = next.arms[a].gripper;
      aperture += std::clamp(command - aperture, -spec.gripper_rate,
                             spec.gripper_rate);
    }
  }

  if (spec.mobile) {
    const double delta =
        std::clamp(input.base_delta, -spec.max_base_delta, spec.max_base_delta);
    next.base_x = std::clamp(next.base_x + delta, spec.base_limits.min,
                             spec.base_limits.max);
  }

  for (ObjectState& object : next.objects) {
    if (object.held_by >= 0) {
      object.position = gripper_point(next, spec, object.held_by);
    }
  }

  // release before grasp so one step never transfers an object
  for (int a = 0; a < static_cast<int>(next.arms.size()); ++a) {
    if (next.arms[a].gripper >= kGripperThreshold) {
      const int held = held_object(next, a);
      if (held >= 0) next.objects[held].held_by = -1;
    }
  }
  for (int a = 0; a < static_cast<int>(next.arms.size()); ++a) {
    if (next.arms[a].gripper >= kGripperThreshold || held_object(next, a) >= 0) {
      continue;
    }
    const Vec2 tip = gripper_point(next, spec, a);
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < next.objects.size(); ++i) {
      if (next.objects[i].held_by >= 0) continue;
      const double d = (next.objects[i].position - tip).norm();
      if (d <= spec.grasp_radius && d < best_dist) {
        best = static_cast<int>(i);
        best_dist = d;
      }
    }
    if (best >= 0) {
      next.objects[best].held_by = a;
      next.objects[best].position = tip;
    }
  }

  next.step_count += 1;
  next.time = static_cast<double>(next.step_count) * dt;

  const int n = spec.num_subtasks();
  if (static_cast<int>(next.raw_achieved.size()) != n) {
    next.raw_achieved.assign(n, false);
  }
  for (int k = 0; k < n; ++k) {
    if (subtask_predicate(next, spec, k)) next.raw_achieved[k] = true;
  }
  if (next.subtask_index < n &&
      subtask_predicate(next, spec, next.subtask_index)) {
    next.subtask_index += 1;
  }
  return {std::move(next), false};
}

std::vector<bool> success(const WorldState& world, const TaskSpec& spec) {
  const int n = spec.num_subtasks();
  std::vector<bool> out(n, false);
  for (int k = 0; k < n && k < world.subtask_index; ++k) out[k] = true;
  return out;
}

bool task_complete(const WorldState& world, const TaskSpec& spec) {
  return world.subtask_index >= spec.num_subtasks();
}

}  // namespace gatelab::sim
