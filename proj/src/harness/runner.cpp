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

#include "gatelab/harness/runner.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gatelab/dagger/env.hpp"
#include "gatelab/harness/dataset_io.hpp"
#include "gatelab/harness/grid.hpp"
#include "gatelab/harness/report.hpp"

namespace gatelab::harness {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  // write-then-rename keeps readers from seeing half a file
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string grid_hash(const ExperimentConfig& config) {
  if (!config.regime.eval_grid) return "";
  GridFile grid;
  grid.task = config.task;
  grid.entries = *config.regime.eval_grid;
  return sha256_hex(format_grid(grid));
}

struct Manifest {
  Json json;
  fs::path path;

  void save() const { write_text(path, json.dump(2) + '\n'); }
};

}  // namespace

fs::path resolve_output_dir(const ExperimentConfig& config) {
  fs::path dir(config.output.dir);
  if (dir.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) {
      dir = fs::path(root) / dir;
    }
  }
  return dir;
}

dagger::RegimeReport report_header(const ExperimentConfig& config) {
  const sim::TaskSpec spec = config.task_spec();
  dagger::RegimeReport r;
  r.config_hash = config_hash(config);
  r.task = std::string(sim::to_string(spec.id));
  r.regime = std::string(dagger::to_string(config.regime.regime));
  r.master_seed = config.regime.master_seed;
  r.eval_seed = config.regime.eval_seed;
  r.eval_episodes = config.regime.eval_grid
                        ? static_cast<int>(config.regime.eval_grid->size())
                        : config.regime.eval_episodes;
  r.eval_grid_hash = grid_hash(config);
  r.subtask_names = spec.subtask_names;
  return r;
}

dagger::RegimeRun run_experiment(const ExperimentConfig& config,
                                 const RunOptions& options,
                                 RunArtifacts* artifacts) {
  const sim::TaskSpec spec = config.task_spec();
  dagger::RegimeConfig regime = config.regime;
  regime.workers = options.workers;
  regime.validate();

  RunArtifacts paths;
  paths.dir = options.output_dir ? *options.output_dir : resolve_output_dir(config);
  fs::create_directories(paths.dir);
  paths.report_csv = paths.dir / "report.csv";
  paths.report_jsonl = paths.dir / "report.jsonl";
  paths.dataset = paths.dir / "dataset.jsonl";
  paths.policy = paths.dir / "policy.pol";
  paths.manifest = paths.dir / "manifest.json";
  if (artifacts) *artifacts = paths;

  const std::string hash = config_hash(config);
  write_text(paths.dir / "config.yaml", serialize_config(config));

  Manifest manifest;
  manifest.path = paths.manifest;
  manifest.json["schema_version"] = kSchemaVersion;
  manifest.json["config_hash"] = hash;
  manifest.json["task"] = sim::to_string(spec.id);
  manifest.json["task_spec_hash"] = task_spec_hash(spec);
  manifest.json["regime"] = dagger::to_string(regime.regime);
  manifest.json["seed"] = regime.master_seed;
  manifest.json["status"] = "running";
  manifest.json["artifacts"] = Json::array({"config.yaml"});
  manifest.save();

  dagger::RegimeReport live = report_header(config);
  auto flush_report = [&] {
    if (config.output.csv) write_text(paths.report_csv, format_report_csv(live));
    if (config.output.jsonl) {
      write_text(paths.report_jsonl, format_report_jsonl(live));
    }
  };
  auto add_artifact = [&](const std::string& name) {
    for (const auto& a : manifest.json["artifacts"]) {
      if (a == name) return;
    }
    manifest.json["artifacts"].push_back(name);
  };

  try {
    dagger::RegimeRun run =
        dagger::run_regime(regime, spec, [&](const dagger::ReportRow& row) {
          live.rows.push_back(row);
          flush_report();
          if (config.output.csv) add_artifact("report.csv");
          if (config.output.jsonl) add_artifact("report.jsonl");
          manifest.save();
        });
    const dagger::RegimeReport header = report_header(config);
    run.report.config_hash = header.config_hash;
    run.report.eval_grid_hash = header.eval_grid_hash;
    live = run.report;
    flush_report();

    if (config.output.save_dataset) {
      write_dataset(paths.dataset, run.dataset);
      DatasetManifest dm = summarize(run.dataset);
      dm.task = sim::to_string(spec.id);
      dm.task_spec_hash = task_spec_hash(spec);
      dm.config_hash = hash;
      dm.seeds = {regime.master_seed};
      write_manifest(paths.dataset, dm);
      add_artifact("dataset.jsonl");
      add_artifact(manifest_path(paths.dataset).filename().string());
    }
    if (config.output.save_policy) {
      policy::save_policy(paths.policy.string(), run.policy);
      add_artifact("policy.pol");
    }
    manifest.json["status"] = "complete";
    manifest.json["human_labeled_steps"] = run.report.human_labeled_steps();
    manifest.save();
    return run;
  } catch (const ConfigError&) {
    manifest.json["status"] = "failed";
    manifest.save();
    throw;
  } catch (const std::exception& e) {
    manifest.json["status"] = "failed";
    manifest.json["error"] = e.what();
    manifest.json["partial"] = manifest.json["artifacts"];
    manifest.save();
    throw;
  }
}

policy::Policy load_policy_for(const fs::path& path, const sim::TaskSpec& spec) {
  policy::Policy policy = policy::load_policy(path.string());
  if (policy.obs_dim != dagger::observation_dim(spec) ||
      policy.act_dim != dagger::action_dim(spec)) {
    throw ConfigError("task.id", "policy dimensions do not match task " +
                                     std::string(sim::to_string(spec.id)));
  }
  return policy;
}

dagger::EvalResult evaluate_policy_file(const fs::path& path,
                                        const ExperimentConfig& config,
                                        int workers) {
  const sim::TaskSpec spec = config.task_spec();
  const policy::Policy policy = load_policy_for(path, spec);
  if (config.regime.eval_grid) {
    return dagger::evaluate(policy, spec, *config.regime.eval_grid, workers);
  }
  return dagger::evaluate(policy, spec, config.regime.eval_episodes,
                          config.regime.eval_seed, workers);
}

std::string inspect_dataset(const fs::path& path) {
  const Dataset data = read_dataset(path);
  const DatasetManifest counted = summarize(data);
  std::ostringstream o;
  o << "file: " << path.string() << '\n'
    << "transitions: " << counted.transitions << '\n'
    << "episodes: " << counted.episodes << '\n'
    << "human: " << counted.human << '\n'
    << "policy: " << counted.policy << '\n';
  std::map<std::string, std::int64_t> modes;
  for (const Transition& t : data) ++modes[std::string(to_string(t.mode_at_step))];
  for (const auto& [mode, n] : modes) o << "mode " << mode << ": " << n << '\n';
  if (!data.empty()) {
    o << "task: " << sim::to_string(data.front().task) << '\n'
      << "obs_dim: " << data.front().obs.size() << '\n'
      << "act_dim: " << data.front().action.size() << '\n';
  }
  if (fs::exists(manifest_path(path))) {
    const DatasetManifest m = read_manifest(path);
    o << "manifest: schema " << m.schema_version << ", config "
      << m.config_hash.substr(0, 12) << ", task spec "
      << m.task_spec_hash.substr(0, 12) << (m.complete ? "" : ", INCOMPLETE")
      << '\n';
    if (m.transitions != counted.transitions || m.human != counted.human) {
      o << "warning: manifest counts differ from file contents\n";
    }
  } else {
    o << "manifest: missing\n";
  }
  return o.str();
}

}  // namespace gatelab::harness
