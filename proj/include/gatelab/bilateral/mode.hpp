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

#ifndef GATELAB_BILATERAL_MODE_HPP_
#define GATELAB_BILATERAL_MODE_HPP_

#include <array>
#include <string_view>

namespace gatelab {

enum class Mode { kIdle, kTeleop, kAutonomous, kTakeover };

enum class ControlEvent {
  kEngageTeleop,
  kStartPolicy,
  kHumanGrab,
  kHumanRelease,
  kStop,
  kSave,
  kReset,
  kDiscard,
};

inline constexpr std::array<Mode, 4> kAllModes = {
    Mode::kIdle, Mode::kTeleop, Mode::kAutonomous, Mode::kTakeover};

inline constexpr std::array<ControlEvent, 8> kAllEvents = {
    ControlEvent::kEngageTeleop, ControlEvent::kStartPolicy,
    ControlEvent::kHumanGrab,    ControlEvent::kHumanRelease,
    ControlEvent::kStop,         ControlEvent::kSave,
    ControlEvent::kReset,        ControlEvent::kDiscard};

// Wire names: IDLE, TELEOP, AUTONOMOUS, TAKEOVER.
std::string_view to_string(Mode mode);
// ENGAGE_TELEOP, START_POLICY, HUMAN_GRAB, ...
std::string_view to_string(ControlEvent event);

// Both throw std::invalid_argument on unknown names.
Mode parse_mode(std::string_view name);
ControlEvent parse_event(std::string_view name);

// SAVE, RESET and DISCARD act on recorded data, never on the mode.
constexpr bool is_data_utility(ControlEvent event) {
  return event == ControlEvent::kSave || event == ControlEvent::kReset ||
         event == ControlEvent::kDiscard;
}

// Human-driven modes produce HUMAN-labeled data.
constexpr bool is_human_driven(Mode mode) {
  return mode == Mode::kTeleop || mode == Mode::kTakeover;
}

}  // namespace gatelab

#endif  // GATELAB_BILATERAL_MODE_HPP_
