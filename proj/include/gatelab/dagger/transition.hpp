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

#ifndef GATELAB_DAGGER_TRANSITION_HPP_
#define GATELAB_DAGGER_TRANSITION_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "gatelab/bilateral/mode.hpp"
#include "gatelab/common.hpp"
#include "gatelab/sim/world.hpp"

namespace gatelab {

// Who produced the action label.
enum class Source { kHuman, kPolicy };

std::string_view to_string(Source source);
Source parse_source(std::string_view name);

// One (observation, action) pair. Only HUMAN transitions are training data.
struct Transition {
  std::int64_t episode = 0;
  std::int64_t step = 0;
  sim::TaskId task = sim::TaskId::kReach2d;
  Vec obs;
  Vec action;
  Source source = Source::kHuman;
  Mode mode_at_step = Mode::kTeleop;
};

using Dataset = std::vector<Transition>;

}  // namespace gatelab

#endif  // GATELAB_DAGGER_TRANSITION_HPP_
