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

#include <stdexcept>
#include <string>

#include "gatelab/bilateral/coupling.hpp"
#include "gatelab/bilateral/mode.hpp"

namespace gatelab {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kIdle: return "IDLE";
    case Mode::kTeleop: return "TELEOP";
    case Mode::kAutonomous: return "AUTONOMOUS";
    case Mode::kTakeover: return "TAKEOVER";
  }
  return "IDLE";
}

std::string_view to_string(ControlEvent event) {
  switch (event) {
    case ControlEvent::kEngageTeleop: return "ENGAGE_TELEOP";
    case ControlEvent::kStartPolicy: return "START_POLICY";
    case ControlEvent::kHumanGrab: return "HUMAN_GRAB";
    case ControlEvent::kHumanRelease: return "HUMAN_RELEASE";
    case ControlEvent::kStop: return "STOP";
    case ControlEvent::kSave: return "SAVE";
    case ControlEvent::kReset: return "RESET";
    case ControlEvent::kDiscard: return "DISCARD";
  }
  return "STOP";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : kAllModes) {
    if (to_string(m) == name) return m;
  }
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

ControlEvent parse_event(std::string_view name) {
  for (ControlEvent e : kAllEvents) {
    if (to_string(e) == name) return e;
  }
  throw std::invalid_argument("unknown event '" + std::string(name) + "'");
}

}  // namespace gatelab

namespace gatelab::bilateral {
namespace {

void check_pair(const sim::JointState& leader, const sim::JointState& follower,
                const CouplingGains& gains) {
  const auto n = gains.kp.size();
  require(gains.kd.size() == n && leader.positions.size() == n &&
              leader.velocities.size() == n &&
              follower.positions.size() == n &&
              follower.velocities.size() == n,
          "coupling: dimension mismatch");
}

}  // namespace

CouplingGains CouplingGains::zero(int dof) {
  return {Vec::Zero(dof), Vec::Zero(dof), 0.0, 0.0};
}

void CouplingGains::validate() const {
  require(kp.size() == kd.size(), "gains: kp/kd size mismatch");
  require((kp.array() > 0).all(), "gains: kp must be positive");
  require((kd.array() >= 0).all(), "gains: kd must be non-negative");
  require(alpha >= 0 && alpha <= 1, "gains: alpha outside [0, 1]");
  require(beta_d >= 0 && beta_d <= 1, "gains: beta_d outside [0, 1]");
}

Vec critical_damping(const Vec& kp, const Vec& inertia) {
  require(kp.size() == inertia.size(), "critical_damping: size mismatch");
  return 2.0 * kp.cwiseProduct(inertia).cwiseSqrt();
}

Vec leader_torque(const sim::JointState& leader,
                  const sim::JointState& follower, const CouplingGains& gains) {
  check_pair(leader, follower, gains);
  return gains.alpha *
             gains.kp.cwiseProduct(follower.positions - leader.positions) +
         gains.beta_d *
             gains.kd.cwiseProduct(follower.velocities - leader.velocities);
}

Vec follower_torque(const sim::JointState& leader,
                    const sim::JointState& follower,
                    const CouplingGains& gains) {
  check_pair(leader, follower, gains);
  return gains.kp.cwiseProduct(leader.positions - follower.positions) +
         gains.kd.cwiseProduct(leader.velocities - follower.velocities);
}

Mode mode_transition(Mode mode, ControlEvent event) {
  switch (event) {
    case ControlEvent::kStop:
      return Mode::kIdle;
    case ControlEvent::kEngageTeleop:
      return mode == Mode::kIdle ? Mode::kTeleop : mode;
    case ControlEvent::kStartPolicy:
      return (mode == Mode::kIdle || mode == Mode::kTeleop) ? Mode::kAutonomous
                                                            : mode;
    case ControlEvent::kHumanGrab:
      return mode == Mode::kAutonomous ? Mode::kTakeover : mode;
    case ControlEvent::kHumanRelease:
      return mode == Mode::kTakeover ? Mode::kAutonomous : mode;
    case ControlEvent::kSave:
    case ControlEvent::kReset:
    case ControlEvent::kDiscard:
      return mode;
  }
  return mode;
}

GainProfile GainProfile::defaults(const sim::ArmModel& arm) {
  const int n = arm.dof();
  auto make = [&](double kp, double scale) {
    Vec kp_vec = Vec::Constant(n, kp);
    return CouplingGains{kp_vec, critical_damping(kp_vec, arm.inertia), scale,
                         scale};
  };
  GainProfile profile;
  profile.entries[Mode::kTeleop] = make(10.0, 0.3);
  profile.entries[Mode::kTakeover] = make(10.0, 0.3);
  profile.entries[Mode::kAutonomous] = make(40.0, 1.0);
  return profile;
}

CouplingGains gains_for_mode(Mode mode, const GainProfile& profile) {
  if (mode == Mode::kIdle) {
    const int n =
        profile.entries.empty() ? 0 : profile.entries.begin()->second.dof();
    return CouplingGains::zero(n);
  }
  auto it = profile.entries.find(mode);
  if (it == profile.entries.end()) {
    throw ConfigError("gains." + std::string(to_string(mode)),
                      "gain profile has no entry for mode " +
                          std::string(to_string(mode)));
  }
  return it->second;
}

Vec compensated_torque(const Vec& raw, const sim::ArmModel& arm,
                       const sim::JointState& q) {
  require(raw.size() == arm.dof(), "compensated_torque: dimension mismatch");
  return raw + sim::gravity_torque(arm, q);
}

bool deviation_exceeds(const sim::JointState& leader,
                       const sim::JointState& follower, double threshold) {
  require(leader.positions.size() == follower.positions.size(),
          "deviation_exceeds: dimension mismatch");
  return (leader.positions - follower.positions).cwiseAbs().maxCoeff() >
         threshold;
}

}  // namespace gatelab::bilateral
