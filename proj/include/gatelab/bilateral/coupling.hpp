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

#ifndef GATELAB_BILATERAL_COUPLING_HPP_
#define GATELAB_BILATERAL_COUPLING_HPP_

#include <map>

#include "gatelab/bilateral/mode.hpp"
#include "gatelab/common.hpp"
#include "gatelab/sim/arm.hpp"

namespace gatelab::bilateral {

// Joint-space coupling between leader (L) and follower (F):
//
//   tau_L = alpha  Kp (q_F - q_L) + beta_d Kd (qd_F - qd_L)
//   tau_F =        Kp (q_L - q_F) +        Kd (qd_L - qd_F)
//
// alpha and beta_d shrink what the operator feels of the follower.
struct CouplingGains {
  Vec kp;  // N m / rad, diagonal
  Vec kd;  // N m s / rad, diagonal
  double alpha = 1.0;
  double beta_d = 1.0;

  int dof() const { return static_cast<int>(kp.size()); }
  static CouplingGains zero(int dof);
  // kp > 0, kd >= 0, alpha and beta_d in [0, 1].
  void validate() const;
};

// Critically damped Kd for a diagonal inertia: 2 sqrt(Kp I).
Vec critical_damping(const Vec& kp, const Vec& inertia);

Vec leader_torque(const sim::JointState& leader,
                  const sim::JointState& follower, const CouplingGains& gains);

Vec follower_torque(const sim::JointState& leader,
                    const sim::JointState& follower,
                    const CouplingGains& gains);

// Total over (mode, event); unlisted pairs keep the mode.
Mode mode_transition(Mode mode, ControlEvent event);

struct GainProfile {
  std::map<Mode, CouplingGains> entries;  // TELEOP, AUTONOMOUS, TAKEOVER
  double grab_threshold = 0.15;           // rad, deviation-triggered takeover

  // Soft kp 10 with alpha = beta_d = 0.3 for human-driven modes, stiff kp 40
  // with alpha = beta_d = 1 for autonomous mirroring.
  static GainProfile defaults(const sim::ArmModel& arm);
};

// IDLE yields zero gains; other modes must be present in the profile.
CouplingGains gains_for_mode(Mode mode, const GainProfile& profile);

// raw + g(q)
Vec compensated_torque(const Vec& raw, const sim::ArmModel& arm,
                       const sim::JointState& q);

// True when any joint of the leader deviates from the follower by more than
// the threshold, i.e. the operator is pulling on the device.
bool deviation_exceeds(const sim::JointState& leader,
                       const sim::JointState& follower, double threshold);

}  // namespace gatelab::bilateral

#endif  // GATELAB_BILATERAL_COUPLING_HPP_
