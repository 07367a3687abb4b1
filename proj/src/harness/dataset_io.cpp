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

#include "gatelab/harness/dataset_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gatelab/harness/config.hpp"

namespace gatelab::harness {
namespace {

using Json = nlohmann::ordered_json;

Json vec_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec json_vec(const Json& j) {
  const std::vector<double> values = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(values.data(),
                               static_cast<Eigen::Index>(values.size()));
}

Json region_json(const sim::PolarRegion& r) {
  return Json{{"origin", {r.origin.x(), r.origin.y()}},
              {"r", {r.r_min, r.r_max}},
              {"phi", {r.phi_min, r.phi_max}},
              {"relative_to_base_goal", r.relative_to_base_goal}};
}

}  // namespace

std::string format_transition(const Transition& t) {
  Json j;
  j["episode"] = t.episode;
  j["step"] = t.step;
  j["task"] = sim::to_string(t.task);
  j["source"] = to_string(t.source);
  j["mode"] = to_string(t.mode_at_step);
  j["obs"] = vec_json(t.obs);
  j["action"] = vec_json(t.action);
  return j.dump();
}

Transition parse_transition(const std::string& line) {
  try {
    const Json j = Json::parse(line);
    Transition t;
    t.episode = j.at("episode");
    t.step = j.at("step");
    t.task = sim::parse_task_id(j.at("task").get<std::string>());
    t.source = parse_source(j.at("source").get<std::string>());
    t.mode_at_step = parse_mode(j.at("mode").get<std::string>());
    t.obs = json_vec(j.at("obs"));
    t.action = json_vec(j.at("action"));
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("dataset: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("dataset: ") + e.what());
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const Transition& t : dataset) out << format_transition(t) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void append_dataset(const std::filesystem::path& path, const Dataset& chunk) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot append to " + path.string());
  for (const Transition& t : chunk) out << format_transition(t) << '\n';
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Dataset out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      out.push_back(parse_transition(line));
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(number) +
                               ": " + e.what());
    }
  }
  return out;
}

std::filesystem::path manifest_path(const std::filesystem::path& dataset) {
  std::filesystem::path p = dataset;
  p.replace_extension(".manifest.json");
  return p;
}

void write_manifest(const std::filesystem::path& dataset,
                    const DatasetManifest& m) {
  Json j;
  j["schema_version"] = m.schema_version;
  j["task"] = m.task;
  j["task_spec_hash"] = m.task_spec_hash;
  j["config_hash"] = m.config_hash;
  j["seeds"] = m.seeds;
  j["transitions"] = m.transitions;
  j["human"] = m.human;
  j["policy"] = m.policy;
  j["episodes"] = m.episodes;
  j["complete"] = m.complete;
  std::ofstream out(manifest_path(dataset), std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest for " + dataset.string());
  out << j.dump(2) << '\n';
}

DatasetManifest read_manifest(const std::filesystem::path& dataset) {
  std::ifstream in(manifest_path(dataset));
  if (!in) throw std::runtime_error("no manifest next to " + dataset.string());
  try {
    const Json j = Json::parse(in);
    DatasetManifest m;
    m.schema_version = j.at("schema_version");
    m.task = j.at("task");
    m.task_spec_hash = j.at("task_spec_hash");
    m.config_hash = j.at("config_hash");
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.transitions = j.at("transitions");
    m.human = j.at("human");
    m.policy = j.at("policy");
    m.episodes = j.at("episodes");
    m.complete = j.at("complete");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("manifest: ") + e.what());
  }
}

DatasetManifest summarize(const Dataset& dataset) {
  DatasetManifest m;
  std::set<std::int64_t> episodes;
  for (const Transition& t : dataset) {
    ++m.transitions;
    (t.source == Source::kHuman ? m.human : m.policy) += 1;
    episodes.insert(t.episode);
  }
  m.episodes = static_cast<std::int64_t>(episodes.size());
  if (!dataset.empty()) m.task = sim::to_string(dataset.front().task);
  return m;
}

std::string task_spec_hash(const sim::TaskSpec& spec) {
  Json j;
  j["id"] = sim::to_string(spec.id);
  j["subtasks"] = spec.subtask_names;
  j["horizon"] = spec.horizon;
  j["dt"] = spec.dt;
  j["arm"] = {{"link_lengths", spec.arm.link_lengths},
              {"link_masses", spec.arm.link_masses},
              {"com_offsets", spec.arm.com_offsets},
              {"gravity", spec.arm.gravity},
              {"inertia", vec_json(spec.arm.inertia)},
              {"damping", vec_json(spec.arm.damping)}};
  for (const sim::JointLimit& l : spec.arm.joint_limits) {
    j["arm"]["joint_limits"].push_back({l.min, l.max});
  }
  for (const Vec2& m : spec.mounts) j["mounts"].push_back({m.x(), m.y()});
  j["mobile"] = spec.mobile;
  j["base_limits"] = {spec.base_limits.min, spec.base_limits.max};
  const sim::Randomization& r = spec.randomization;
  for (const sim::JointLimit& l : r.start_joints) {
    j["randomization"]["start_joints"].push_back({l.min, l.max});
  }
  for (const auto& g : r.objects) j["randomization"]["objects"].push_back(region_json(g));
  for (const auto& g : r.goals) j["randomization"]["goals"].push_back(region_json(g));
  j["randomization"]["base_goal"] = {r.base_goal.min, r.base_goal.max};
  j["tolerances"] = {spec.reach_tolerance, spec.grasp_radius, spec.place_tolerance};
  j["gripper_rate"] = spec.gripper_rate;
  j["action_bounds"] = {spec.max_joint_delta, spec.max_base_delta};
  j["servo"] = {vec_json(spec.servo_kp), vec_json(spec.servo_kd)};
  return sha256_hex(j.dump());
}

}  // namespace gatelab::harness
