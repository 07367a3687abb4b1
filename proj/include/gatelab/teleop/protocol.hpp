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

#ifndef GATELAB_TELEOP_PROTOCOL_HPP_
#define GATELAB_TELEOP_PROTOCOL_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gatelab/bilateral/mode.hpp"
#include "gatelab/common.hpp"

namespace gatelab::teleop {

inline constexpr int kProtocolVersion = 1;

// Client -> server frame.
struct Command {
  enum class Kind { kEvent, kDrive, kGripper };

  Kind kind = Kind::kEvent;
  ControlEvent event = ControlEvent::kStop;  // kEvent
  int arm = 0;                               // kDrive, kGripper
  std::optional<Vec> joint_deltas;           // kDrive, leader joint space
  std::optional<Vec2> ee_target;             // kDrive, world frame
  double gripper = 1.0;                      // kGripper, 1 open / 0 closed
  std::int64_t last_seen_tick = -1;
};

// Throws std::invalid_argument describing what is wrong with the frame.
Command parse_command(const std::string& line);
std::string format_command(const Command& command);

// Per-message drive bound in rad; larger leader deltas are clamped.
inline constexpr double kMaxDriveDelta = 0.25;

}  // namespace gatelab::teleop

#endif  // GATELAB_TELEOP_PROTOCOL_HPP_
