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

#include "gatelab/dagger/env.hpp"

#include <algorithm>

#include "gatelab/bilateral/coupling.hpp"

namespace gatelab::dagger {

int action_dim(const sim::TaskSpec& spec) {
  const int per_arm = spec.arm.dof() + (spec.has_gripper() ? 1 : 0);
  return spec.num_arms() * per_arm + (spec.mobile ? 1 : 0);
}

int observation_dim(const sim::TaskSpec& spec) {
  const int arms =
      spec.num_arms() * (3 * spec.arm.dof() + 2 + (spec.has_gripper() ? 1 : 0));
  const int objects = 3 * static_cast<int>(spec.randomization.objects.size());
  const int goals = 2 * static_cast<int>(spec.randomization.goals.size());
  return arms + objects + goals + (spec.mobile ? 2 : 0) +
         (spec.num_subtasks() > 1 ? 1 : 0);
}

Vec observe(const sim::WorldState& world, const sim::TaskSpec& spec) {
  Vec obs(observation_dim(spec));
  Eigen::Index i = 0;
  const int dof = spec.arm.dof();
  for (std::size_t a = 0; a < world.arms.size(); ++a) {
    const sim::ArmInstance& arm = world.arms[a];
    obs.segment(i, dof) = arm.joints.positions;
    obs.segment(i + dof, dof) = arm.joints.velocities;
    obs.segment(i + 2 * dof, dof) = arm.setpoint;
    i += 3 * dof;
    // Cartesian tip position, the feature grasp decisions hinge on
    const Vec2 tip = sim::gripper_point(world, spec, static_cast<int>(a));
    obs[i++] = tip.x();
    obs[i++] = tip.y();
    if (spec.has_gripper()) obs[i++] = arm.gripper;
  }
  if (spec.mobile) obs[i++] = world.base_x;
  for (const sim::ObjectState& o : world.objects) {
    obs[i++] = o.position.x();
    obs[i++] = o.position.y();
    obs[i++] = o.held_by >= 0 ? 1.0 : 0.0;
  }
  for (const Vec2& g : world.goals) {
    obs[i++] = g.x();
    obs[i++] = g.y();
  }
  if (spec.mobile) obs[i++] = world.base_goal;
  if (spec.num_subtasks() > 1) obs[i++] = world.subtask_index;
  require(i == obs.size(), "observe: world does not match task layout");
  return obs;
}

Vec finalize_action(const Vec& action, const sim::TaskSpec& spec) {
  require(action.size() == action_dim(spec), "action dimension mismatch");
  Vec out = action;
  const int dof = spec.arm.dof();
  Eigen::Index i = 0;
  for (int a = 0; a < spec.num_arms(); ++a) {
    for (int j = 0; j < dof; ++j, ++i) {
      out[i] = std::clamp(out[i], -spec.max_joint_delta, spec.max_joint_delta);
    }
    if (spec.has_gripper()) {
      out[i] = out[i] < 0.5 ? 0.0 : 1.0;
      ++i;
    }
  }
  if (spec.mobile) {
    out[i] = std::clamp(out[i], -spec.max_base_delta, spec.max_base_delta);
  }
  return out;
}

Vec servo_torque(const sim::TaskSpec& spec, const sim::ArmInstance& arm) {
  // the set point acts as a virtual leader at rest
  const bilateral::CouplingGains gains{spec.servo_kp, spec.servo_kd, 1.0, 1.0};
  const sim::JointState target = sim::JointState::at_rest(arm.setpoint);
  return bilateral::compensated_torque(
      bilateral::follower_torque(target, arm.joints, gains), spec.arm,
      arm.joints);
}

sim::StepResult apply_action(const sim::WorldState& world,
                             const sim::TaskSpec& spec, const Vec& action) {
  const Vec a = finalize_action(action, spec);
  sim::WorldState commanded = world;
  sim::StepInput input;
  const int dof = spec.arm.dof();
  Eigen::Index i = 0;
  for (sim::ArmInstance& arm : commanded.arms) {
    arm.setpoint = sim::clamp_to_limits(spec.arm, arm.setpoint + a.segment(i, dof));
    i += dof;
    if (spec.has_gripper()) input.gripper.push_back(a[i++]);
    input.torques.push_back(servo_torque(spec, arm));
  }
  if (spec.mobile) input.base_delta = a[i];
  sim::StepResult result = sim::step(commanded, spec, input, spec.dt);
  if (result.episode_over) result.world = world;
  return result;
}

}  // namespace gatelab::dagger
