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

#ifndef GATELAB_HARNESS_GRID_HPP_
#define GATELAB_HARNESS_GRID_HPP_

#include <filesystem>
#include <string>

#include "gatelab/dagger/rollout.hpp"
#include "gatelab/sim/world.hpp"

namespace gatelab::harness {

// Fixed evaluation configurations stored as versioned text:
//
//   version 1
//   task pickplace2d
//   entry seed=2000 object0=1.30,-0.30 goal0=1.25,1.00
//
// Keys besides seed are optional placement overrides: objectN, goalN
// (x,y), joints (q1,q2) and base_goal. '#' starts a comment.
struct GridFile {
  sim::TaskId task = sim::TaskId::kReach2d;
  dagger::EvalGrid entries;
};

GridFile parse_grid(const std::string& text);
GridFile load_grid(const std::filesystem::path& path);
std::string format_grid(const GridFile& grid);

// Entries with explicit placements drawn from the task's own randomization,
// so the file pins every location independently of the sampler.
GridFile make_grid(const sim::TaskSpec& spec, int n, std::uint64_t seed);

}  // namespace gatelab::harness

#endif  // GATELAB_HARNESS_GRID_HPP_
