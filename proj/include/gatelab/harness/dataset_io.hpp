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

#ifndef GATELAB_HARNESS_DATASET_IO_HPP_
#define GATELAB_HARNESS_DATASET_IO_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "gatelab/dagger/transition.hpp"
#include "gatelab/sim/world.hpp"

namespace gatelab::harness {

// Sidecar describing a dataset file (<name>.manifest.json).
struct DatasetManifest {
  int schema_version = 1;
  std::string task;
  std::string task_spec_hash;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::int64_t transitions = 0;
  std::int64_t human = 0;
  std::int64_t policy = 0;
  std::int64_t episodes = 0;
  bool complete = true;
};

// One JSON object per line:
// {"episode":0,"step":0,"task":"reach2d","source":"HUMAN","mode":"TELEOP",
//  "obs":[...],"action":[...]}
std::string format_transition(const Transition& t);
Transition parse_transition(const std::string& line);

void write_dataset(const std::filesystem::path& path, const Dataset& dataset);
Dataset read_dataset(const std::filesystem::path& path);

// Appends lines to an open dataset file; used by live sessions.
void append_dataset(const std::filesystem::path& path, const Dataset& chunk);

std::filesystem::path manifest_path(const std::filesystem::path& dataset);
void write_manifest(const std::filesystem::path& dataset,
                    const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& dataset);

// Counts derived from the data itself.
DatasetManifest summarize(const Dataset& dataset);

// SHA-256 over a canonical rendering of every TaskSpec field.
std::string task_spec_hash(const sim::TaskSpec& spec);

}  // namespace gatelab::harness

#endif  // GATELAB_HARNESS_DATASET_IO_HPP_
