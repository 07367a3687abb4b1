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

#include "gatelab/dagger/expert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gatelab/dagger/env.hpp"

namespace gatelab::dagger {
namespace {

using sim::TaskId;

bool placed(const sim::WorldState& w, const sim::TaskSpec& spec, int object,
            int goal) {
  const sim::ObjectState& o = w.objects[object];
  return o.held_by < 0 &&
         (o.position - w.goals[goal]).norm() < spec.place_tolerance;
}

// Smooth saturation with unit slope at the origin; keeps the labels
// differentiable so a tanh network can fit them.
double soft_limit(double x, double limit) {
  return limit * std::tanh(x / limit);
}

Waypoint hold(int arm, GripIntent grip = GripIntent::kNone) {
  Waypoint wp;
  wp.arm = arm;
  wp.hold = true;
  wp.grip = grip;
  return wp;
}

Waypoint go(int arm, const Vec2& target, GripIntent grip, int subtask = 0) {
  Waypoint wp;
  wp.arm = arm;
  wp.target = target;
  wp.grip_ref = target;
  wp.grip = grip;
  wp.subtask = subtask;
  return wp;
}

// Pick `object` and place it at `goal` with one arm.
Waypoint pick_place(const sim::WorldState& w, int arm, int object,
                    const Vec2& goal, int subtask) {
  const int held = sim::held_object(w, arm);
  if (held >= 0 && held != object) return hold(arm, GripIntent::kOpen);
  if (held == object) return go(arm, goal, GripIntent::kRelease, subtask);
  return go(arm, w.objects[object].position, GripIntent::kGrasp, subtask);
}

}  // namespace

std::vector<Waypoint> active_waypoints(const sim::WorldState& w,
                                       const sim::TaskSpec& spec,
                                       const ScriptedExpert& expert) {
  if (sim::task_complete(w, spec)) {
    std::vector<Waypoint> idle;
    for (int a = 0; a < spec.num_arms(); ++a) {
      idle.push_back(hold(a, spec.has_gripper() ? GripIntent::kOpen
                                                : GripIntent::kNone));
    }
    return idle;
  }
  switch (spec.id) {
    case TaskId::kReach2d:
      return {go(0, w.goals[0], GripIntent::kNone)};
    case TaskId::kPickPlace2d:
      return {pick_place(w, 0, 0, w.goals[0], 0)};
    case TaskId::kKitchenLite:
      switch (w.subtask_index) {
        case 0: return {pick_place(w, 0, 0, w.goals[1], 0)};
        case 1: return {pick_place(w, 0, 1, w.goals[0], 1)};
        default: return {pick_place(w, 0, 1, w.goals[0], 2)};
      }
    case TaskId::kBiTransport2d: {
      std::vector<Waypoint> out;
      for (int a = 0; a < 2; ++a) {
        const int held = sim::held_object(w, a);
        if (held >= 0 && held != a) {
          out.push_back(hold(a, GripIntent::kOpen));
        } else if (placed(w, spec, a, a)) {
          out.push_back(hold(a, GripIntent::kOpen));
        } else if (held == a) {
          // aim at the goal as seen from the final base position so the arm
          // is already posed when the base arrives
          Waypoint wp = go(a, w.goals[a] - Vec2(w.base_goal - w.base_x, 0.0),
                           GripIntent::kRelease);
          wp.grip_ref = w.goals[a];
          out.push_back(wp);
        } else {
          out.push_back(go(a, w.objects[a].position, GripIntent::kGrasp));
        }
      }
      return out;
    }
  }
  return {};
}

Vec expert_action(const ScriptedExpert& expert, const sim::WorldState& world,
                  const sim::TaskSpec& spec) {
  Vec action = Vec::Zero(action_dim(spec));
  const int dof = spec.arm.dof();
  const std::vector<Waypoint> plan = active_waypoints(world, spec, expert);
  Eigen::Index i = 0;
  for (const Waypoint& wp : plan) {
    const sim::ArmInstance& arm = world.arms[wp.arm];
    double distance = std::numeric_limits<double>::infinity();
    if (!wp.hold) {
      const Vec2 local = wp.target - sim::arm_origin(world, spec, wp.arm);
      const Vec goal_q =
          sim::clamp_to_limits(spec.arm, sim::inverse_kinematics(spec.arm, local));
      action.segment(i, dof) = (goal_q - arm.setpoint).unaryExpr([&](double e) {
        return soft_limit(expert.joint_gain * e, spec.max_joint_delta);
      });
      distance = (sim::gripper_point(world, spec, wp.arm) - wp.grip_ref).norm();
    }
    i += dof;
    if (spec.has_gripper()) {
      double grip = 1.0;
      switch (wp.grip) {
        case GripIntent::kGrasp:
          grip = distance < expert.close_radius ? 0.0 : 1.0;
          break;
        case GripIntent::kCarry: grip = 0.0; break;
        case GripIntent::kRelease:
          grip = distance < expert.release_radius ? 1.0 : 0.0;
          break;
        case GripIntent::kOpen:
        case GripIntent::kNone: grip = 1.0; break;
      }
      action[i++] = grip;
    }
  }

  if (spec.mobile) {
    bool carrying = true;
    for (int a = 0; a < spec.num_arms(); ++a) {
      carrying = carrying && sim::held_object(world, a) == a;
    }
    double delta = 0.0;
    if (carrying &&
        std::abs(world.base_x - world.base_goal) >= expert.base_tolerance) {
      delta = soft_limit(expert.base_gain * (world.base_goal - world.base_x),
                         spec.max_base_delta);
    }
    action[i] = delta;
  }
  return action;
}

}  // namespace gatelab::dagger
