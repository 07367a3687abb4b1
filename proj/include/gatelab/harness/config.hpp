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

#ifndef GATELAB_HARNESS_CONFIG_HPP_
#define GATELAB_HARNESS_CONFIG_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gatelab/bilateral/coupling.hpp"
#include "gatelab/dagger/regime.hpp"
#include "gatelab/sim/world.hpp"

namespace gatelab::harness {

inline constexpr int kSchemaVersion = 1;

// Optional scalar overrides applied on top of the built-in task defaults.
struct TaskOverrides {
  std::optional<int> horizon;
  std::optional<double> reach_tolerance;
  std::optional<double> grasp_radius;
  std::optional<double> place_tolerance;
};

struct OutputConfig {
  std::string dir = "runs/default";
  bool csv = true;
  bool jsonl = true;
  bool save_dataset = true;
  bool save_policy = true;
};

struct ServeConfig {
  std::string listen = "127.0.0.1";
  int port = 8765;
  double tick_hz = 100.0;
  double snapshot_hz = 20.0;
  std::string policy;  // .pol file; empty drives with the scripted expert
  int queue_capacity = 256;
  std::uint64_t seed = 0;  // environment seed of the first episode
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  sim::TaskId task = sim::TaskId::kReach2d;
  TaskOverrides overrides;
  dagger::RegimeConfig regime;
  // As written in the file; resolved against the config's directory.
  std::string eval_grid_path;
  bilateral::GainProfile gains;
  OutputConfig output;
  ServeConfig serve;

  sim::TaskSpec task_spec() const;
};

// Parses and fully validates YAML text. Unknown keys, type errors and range
// violations throw ConfigError carrying the dotted field path and, when the
// text has one, the 1-based line. Relative grid paths resolve against
// `base_dir`.
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text with every field resolved; parse(serialize(c)) reproduces c.
std::string serialize_config(const ExperimentConfig& config);

// Hex SHA-256 of the canonical text.
std::string config_hash(const ExperimentConfig& config);
std::string sha256_hex(const std::string& bytes);

}  // namespace gatelab::harness

#endif  // GATELAB_HARNESS_CONFIG_HPP_
