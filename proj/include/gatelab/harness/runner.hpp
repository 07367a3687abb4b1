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

#ifndef GATELAB_HARNESS_RUNNER_HPP_
#define GATELAB_HARNESS_RUNNER_HPP_

#include <filesystem>
#include <optional>
#include <string>

#include "gatelab/dagger/regime.hpp"
#include "gatelab/harness/config.hpp"

namespace gatelab::harness {

// Environment variable that re-roots relative output directories.
inline constexpr const char* kOutputRootEnv = "GATELAB_OUTPUT_ROOT";

std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

struct RunOptions {
  int workers = 1;
  std::optional<std::filesystem::path> output_dir;  // replaces output.dir
};

struct RunArtifacts {
  std::filesystem::path dir;
  std::filesystem::path report_csv;
  std::filesystem::path report_jsonl;
  std::filesystem::path dataset;
  std::filesystem::path policy;
  std::filesystem::path manifest;
};

// Executes the configured regime and writes report (csv/jsonl), dataset,
// policy, the canonical config and a run manifest into the output
// directory. Report files are rewritten after every row, so a failing run
// leaves its completed rows behind; the manifest then records status
// "failed" and the error before the exception propagates.
dagger::RegimeRun run_experiment(const ExperimentConfig& config,
                                 const RunOptions& options = {},
                                 RunArtifacts* artifacts = nullptr);

// Report of a run with the identity header filled in but no rows.
dagger::RegimeReport report_header(const ExperimentConfig& config);

// Evaluates a stored policy under the config's task and eval protocol.
// Loads a policy and checks its dimensions against the task.
policy::Policy load_policy_for(const std::filesystem::path& path,
                               const sim::TaskSpec& spec);

dagger::EvalResult evaluate_policy_file(const std::filesystem::path& policy,
                                        const ExperimentConfig& config,
                                        int workers = 1);

// Human-readable summary of a dataset file and its manifest.
std::string inspect_dataset(const std::filesystem::path& path);

}  // namespace gatelab::harness

#endif  // GATELAB_HARNESS_RUNNER_HPP_
