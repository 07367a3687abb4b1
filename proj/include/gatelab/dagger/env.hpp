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

#ifndef GATELAB_DAGGER_ENV_HPP_
#define GATELAB_DAGGER_ENV_HPP_

#include "gatelab/common.hpp"
#include "gatelab/sim/world.hpp"

namespace gatelab::dagger {

// Action layout, per arm: [joint deltas (dof), gripper (if any)], then the
// base delta for mobile tasks. Joint deltas move the servo set point.
int action_dim(const sim::TaskSpec& spec);

// Observation layout: per arm [q, qd, setpoint, tip xy, aperture (if any)], base_x (mobile), per object
// [x, y, held], per goal [x, y], base_goal (mobile), subtask index
// (multi-stage tasks).
int observation_dim(const sim::TaskSpec& spec);
Vec observe(const sim::WorldState& world, const sim::TaskSpec& spec);

// Clamp joint and base deltas to their bounds and snap gripper channels to
// {0, 1} (binary actuator: < 0.5 closes).
Vec finalize_action(const Vec& action, const sim::TaskSpec& spec);

// Joint servo torque for one arm: Kp (s - q) - Kd qd + g(q).
Vec servo_torque(const sim::TaskSpec& spec, const sim::ArmInstance& arm);

// Move set points by the (finalized) action and advance one physics step.
sim::StepResult apply_action(const sim::WorldState& world,
                             const sim::TaskSpec& spec, const Vec& action);

}  // namespace gatelab::dagger

#endif  // GATELAB_DAGGER_ENV_HPP_
