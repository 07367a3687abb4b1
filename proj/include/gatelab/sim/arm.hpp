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

#ifndef GATELAB_SIM_ARM_HPP_
#define GATELAB_SIM_ARM_HPP_

#include <vector>

#include "gatelab/common.hpp"

namespace gatelab::sim {

struct JointLimit {
  double min;
  double max;
};

// Planar serial chain. Joint angles are relative, the first measured from +x;
// gravity acts along -y.
struct ArmModel {
  std::vector<double> link_lengths;  // m
  std::vector<double> link_masses;   // kg
  std::vector<double> com_offsets;   // m, proximal joint to link COM
  std::vector<JointLimit> joint_limits;
  double gravity = 9.81;  // m/s^2
  Vec inertia;            // constant diagonal joint inertia, kg m^2
  Vec damping;            // viscous joint damping, N m s/rad

  int dof() const { return static_cast<int>(link_lengths.size()); }

  // Throws ContractViolation when an invariant does not hold.
  void validate() const;

  // 1 m / 1 kg links, COM at mid-link.
  static ArmModel two_link();
};

// Diagonal inertia of the fully extended chain about each joint
// (point masses at the COMs plus slender-rod terms).
Vec extended_inertia(const ArmModel& arm);

struct JointState {
  Vec positions;   // rad
  Vec velocities;  // rad/s

  static JointState at_rest(const Vec& positions) {
    return {positions, Vec::Zero(positions.size())};
  }
};

// End effector relative to the arm mount.
Vec2 forward_kinematics(const ArmModel& arm, const JointState& q);
Vec2 forward_kinematics(const ArmModel& arm, const Vec& positions);

// Gravity term of the manipulator equation, g(theta).
Vec gravity_torque(const ArmModel& arm, const JointState& q);
Vec gravity_torque(const ArmModel& arm, const Vec& positions);

// d g(theta) / d theta, column k = derivative w.r.t. theta_k.
Eigen::MatrixXd gravity_torque_jacobian(const ArmModel& arm,
                                        const Vec& positions);

// Potential and kinetic energy under the diagonal-inertia model.
double potential_energy(const ArmModel& arm, const Vec& positions);
double kinetic_energy(const ArmModel& arm, const Vec& velocities);

// Closed-form IK for two-link arms, positive-elbow branch. Targets outside
// the annulus are projected onto it first.
Vec inverse_kinematics(const ArmModel& arm, const Vec2& target);

// Clamp into joint limits.
Vec clamp_to_limits(const ArmModel& arm, const Vec& positions);

// One semi-implicit Euler step of M qdd = tau - g(q) - D qd. A joint pushed
// past its limit is clamped there with its velocity zeroed.
JointState integrate(const ArmModel& arm, const JointState& state,
                     const Vec& tau, double dt);

}  // namespace gatelab::sim

#endif  // GATELAB_SIM_ARM_HPP_
