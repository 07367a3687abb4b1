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

#include "gatelab/harness/config.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "gatelab/harness/grid.hpp"

namespace gatelab::harness {
namespace {

int line_of(const YAML::Node& node) {
  return node.Mark().is_null() ? -1 : node.Mark().line + 1;
}

std::string with_line(const std::string& what, int line) {
  return line > 0 ? "line " + std::to_string(line) + ": " + what : what;
}

[[noreturn]] void fail(const std::string& field, const std::string& what,
                       int line) {
  throw ConfigError(field, with_line(field + ": " + what, line), line);
}

template <typename T>
const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

// Missing keys and explicit nulls both count as "not given".
bool given(const YAML::Node& node) { return node && !node.IsNull(); }

// A mapping whose keys are consumed one by one; finish() rejects leftovers.
class Section {
 public:
  Section(const YAML::Node& node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (given(node_) && !node_.IsMap()) {
      fail(path_, "expected a mapping", line_of(node_));
    }
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  YAML::Node take(const std::string& key) {
    seen_.insert(key);
    return given(node_) ? node_[key] : YAML::Node();
  }

  template <typename T>
  std::optional<T> get(const std::string& key) {
    const YAML::Node value = take(key);
    if (!given(value)) return std::nullopt;
    if (!value.IsScalar()) {
      fail(field(key), std::string("expected ") + type_name<T>(), line_of(value));
    }
    try {
      return value.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(field(key),
           std::string("expected ") + type_name<T>() + ", got '" +
               value.Scalar() + "'",
           line_of(value));
    }
  }

  template <typename T>
  void read(const std::string& key, T* out) {
    if (auto v = get<T>(key)) *out = *v;
  }

  Vec vector(const std::string& key, const Vec& fallback) {
    const YAML::Node value = take(key);
    if (!given(value)) return fallback;
    if (!value.IsSequence()) {
      fail(field(key), "expected a list of numbers", line_of(value));
    }
    Vec out(static_cast<Eigen::Index>(value.size()));
    for (std::size_t i = 0; i < value.size(); ++i) {
      try {
        out[static_cast<Eigen::Index>(i)] = value[i].as<double>();
      } catch (const YAML::BadConversion&) {
        fail(field(key), "expected a list of numbers", line_of(value[i]));
      }
    }
    return out;
  }

  int line() const { return line_of(node_); }

  void finish() const {
    if (!given(node_)) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.Scalar();
      if (!seen_.count(key)) fail(field(key), "unknown key", line_of(kv.first));
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_train(Section& s, policy::TrainConfig* train) {
  s.read("learning_rate", &train->learning_rate);
  s.read("batch_size", &train->batch_size);
  s.read("grad_steps", &train->grad_steps);
  s.read("hidden_dim", &train->hidden_dim);
}

void read_gains(Section& s, const sim::ArmModel& arm, bilateral::GainProfile* out) {
  s.read("grab_threshold", &out->grab_threshold);
  if (!(out->grab_threshold > 0)) {
    fail(s.field("grab_threshold"), "must be positive", s.line());
  }
  for (Mode mode : {Mode::kTeleop,
                               Mode::kAutonomous,
                               Mode::kTakeover}) {
    const std::string name(to_string(mode));
    Section m(s.take(name), s.field(name));
    bilateral::CouplingGains& g = out->entries[mode];
    const bool kp_given = given(m.take("kp"));
    g.kp = m.vector("kp", g.kp);
    if (g.kp.size() != arm.dof()) {
      fail(m.field("kp"), "needs one entry per joint", m.line());
    }
    // an explicit kp without kd stays critically damped
    g.kd = m.vector("kd", kp_given ? bilateral::critical_damping(g.kp, arm.inertia)
                                   : g.kd);
    m.read("alpha", &g.alpha);
    m.read("beta_d", &g.beta_d);
    m.finish();
    if (g.kd.size() != arm.dof()) {
      fail(m.field("kd"), "needs one entry per joint", m.line());
    }
    try {
      g.validate();
    } catch (const ContractViolation& e) {
      fail(m.field("kp"), e.what(), m.line());
    }
  }
  s.finish();
}

// Shortest text that parses back to the same double.
std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, r.ptr);
  // keep floats recognizable as such
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string list(const Vec& v) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += (i ? ", " : "") + num(v[i]);
  }
  return out + "]";
}

std::string quoted(const std::string& s) {
  YAML::Emitter e;
  e << YAML::DoubleQuoted << s;
  return e.c_str();
}

}  // namespace

sim::TaskSpec ExperimentConfig::task_spec() const {
  sim::TaskSpec spec = sim::make_task(task);
  if (overrides.horizon) spec.horizon = *overrides.horizon;
  if (overrides.reach_tolerance) spec.reach_tolerance = *overrides.reach_tolerance;
  if (overrides.grasp_radius) spec.grasp_radius = *overrides.grasp_radius;
  if (overrides.place_tolerance) spec.place_tolerance = *overrides.place_tolerance;
  return spec;
}

ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("", with_line(e.msg, e.mark.line + 1), e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("task.id", "task.id: missing");

  ExperimentConfig c;
  Section top(root, "");
  top.read("schema_version", &c.schema_version);
  if (c.schema_version != kSchemaVersion) {
    fail("schema_version",
         "unsupported version " + std::to_string(c.schema_version),
         line_of(root["schema_version"]));
  }

  {
    Section s(top.take("task"), "task");
    const auto id = s.get<std::string>("id");
    if (!id) fail("task.id", "missing", s.line());
    try {
      c.task = sim::parse_task_id(*id);
    } catch (const ConfigError&) {
      fail("task.id", "unknown task '" + *id + "'", line_of(root["task"]["id"]));
    }
    c.overrides.horizon = s.get<int>("horizon");
    c.overrides.reach_tolerance = s.get<double>("reach_tolerance");
    c.overrides.grasp_radius = s.get<double>("grasp_radius");
    c.overrides.place_tolerance = s.get<double>("place_tolerance");
    s.finish();
    try {
      c.task_spec().validate();
    } catch (const ContractViolation& e) {
      fail("task", e.what(), s.line());
    }
  }

  dagger::RegimeConfig& r = c.regime;
  std::optional<int> explicit_eval_episodes;
  std::optional<int> iterations_given;
  {
    Section s(top.take("regime"), "regime");
    if (const auto kind = s.get<std::string>("kind")) {
      try {
        r.regime = dagger::parse_regime(*kind);
      } catch (const ConfigError&) {
        fail("regime.kind", "unknown regime '" + *kind + "'",
             line_of(root["regime"]["kind"]));
      }
    }
    s.read("seed", &r.master_seed);
    s.read("warmup_demos", &r.warmup_demos);
    iterations_given = s.get<int>("dagger_iterations");
    if (iterations_given) r.dagger_iterations = *iterations_given;
    s.read("episodes_per_iteration", &r.episodes_per_iteration);
    s.read("human_step_budget", &r.human_step_budget);
    explicit_eval_episodes = s.get<int>("eval_episodes");
    if (explicit_eval_episodes) r.eval_episodes = *explicit_eval_episodes;
    s.read("eval_seed", &r.eval_seed);
    s.read("eval_each_iteration", &r.eval_each_iteration);
    if (const auto grid = s.get<std::string>("eval_grid")) {
      c.eval_grid_path = *grid;
    }
    s.finish();
  }
  if (r.regime == dagger::Regime::kOfflineBc && !iterations_given) {
    r.dagger_iterations = 0;
  }

  {
    Section s(top.take("train"), "train");
    read_train(s, &r.train);
    s.read("seed", &r.train.seed);
    r.finetune_steps = s.get<int>("finetune_steps");
    r.finetune_learning_rate = s.get<double>("finetune_learning_rate");
    s.finish();
  }
  if (const YAML::Node node = top.take("retrain"); given(node)) {
    Section s(node, "retrain");
    policy::TrainConfig retrain = r.train;
    read_train(s, &retrain);
    s.finish();
    r.retrain = retrain;
  }
  {
    Section s(top.take("gate"), "gate");
    s.read("epsilon", &r.gate.epsilon);
    s.read("lambda", &r.gate.lambda);
    s.read("min_hold", &r.gate.min_hold);
    if (const auto expert = s.get<std::string>("expert")) {
      if (*expert == "scripted") {
        r.gate.expert = dagger::ExpertKind::kScripted;
      } else if (*expert == "human") {
        r.gate.expert = dagger::ExpertKind::kHuman;
      } else {
        fail("gate.expert", "expected scripted or human",
             line_of(root["gate"]["expert"]));
      }
    }
    s.finish();
  }
  {
    Section s(top.take("expert"), "expert");
    s.read("joint_gain", &r.expert.joint_gain);
    s.read("close_radius", &r.expert.close_radius);
    s.read("release_radius", &r.expert.release_radius);
    s.read("base_gain", &r.expert.base_gain);
    s.read("base_tolerance", &r.expert.base_tolerance);
    s.finish();
    if (!(r.expert.joint_gain > 0 && r.expert.close_radius > 0 &&
          r.expert.release_radius > 0 && r.expert.base_gain > 0 &&
          r.expert.base_tolerance > 0)) {
      fail("expert", "all expert parameters must be positive", s.line());
    }
  }

  c.gains = bilateral::GainProfile::defaults(c.task_spec().arm);
  {
    Section s(top.take("gains"), "gains");
    read_gains(s, c.task_spec().arm, &c.gains);
  }
  {
    Section s(top.take("output"), "output");
    s.read("dir", &c.output.dir);
    s.read("csv", &c.output.csv);
    s.read("jsonl", &c.output.jsonl);
    s.read("save_dataset", &c.output.save_dataset);
    s.read("save_policy", &c.output.save_policy);
    s.finish();
    if (!c.output.csv && !c.output.jsonl) {
      fail("output.csv", "at least one report format must be enabled", s.line());
    }
  }
  {
    Section s(top.take("serve"), "serve");
    ServeConfig& v = c.serve;
    s.read("listen", &v.listen);
    s.read("port", &v.port);
    s.read("tick_hz", &v.tick_hz);
    s.read("snapshot_hz", &v.snapshot_hz);
    s.read("policy", &v.policy);
    s.read("queue_capacity", &v.queue_capacity);
    s.read("seed", &v.seed);
    s.finish();
    if (v.port < 0 || v.port > 65535) fail("serve.port", "out of range", s.line());
    if (!(v.tick_hz > 0) || !(v.snapshot_hz > 0) || v.snapshot_hz > v.tick_hz) {
      fail("serve.snapshot_hz", "need 0 < snapshot_hz <= tick_hz", s.line());
    }
    if (v.queue_capacity < 1) {
      fail("serve.queue_capacity", "must be >= 1", s.line());
    }
  }
  top.finish();

  if (!c.eval_grid_path.empty()) {
    std::filesystem::path p(c.eval_grid_path);
    if (p.is_relative()) p = base_dir / p;
    GridFile grid = load_grid(p);
    if (grid.task != c.task) {
      fail("regime.eval_grid",
           "grid is for task " + std::string(sim::to_string(grid.task)),
           line_of(root["regime"]["eval_grid"]));
    }
    const int n = static_cast<int>(grid.entries.size());
    if (explicit_eval_episodes && *explicit_eval_episodes != n) {
      fail("regime.eval_episodes",
           "grid lists " + std::to_string(n) + " entries",
           line_of(root["regime"]["eval_episodes"]));
    }
    r.eval_episodes = n;
    r.eval_grid = std::move(grid.entries);
  }
  try {
    r.validate();
  } catch (const ConfigError& e) {
    // point at the offending key when the file has one
    YAML::Node node;
    node.reset(root);
    std::string path = e.field();
    for (std::size_t dot; node.IsMap() && !path.empty();) {
      dot = path.find('.');
      const YAML::Node& parent = node;
      node.reset(parent[path.substr(0, dot)]);
      path = dot == std::string::npos ? "" : path.substr(dot + 1);
    }
    if (e.line() > 0 || !path.empty() || !given(node)) throw;
    fail(e.field(), e.what(), line_of(node));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::string serialize_config(const ExperimentConfig& c) {
  const dagger::RegimeConfig& r = c.regime;
  std::ostringstream o;
  o << "schema_version: " << c.schema_version << '\n';
  o << "task:\n  id: " << sim::to_string(c.task) << '\n';
  if (c.overrides.horizon) o << "  horizon: " << *c.overrides.horizon << '\n';
  if (c.overrides.reach_tolerance) {
    o << "  reach_tolerance: " << num(*c.overrides.reach_tolerance) << '\n';
  }
  if (c.overrides.grasp_radius) {
    o << "  grasp_radius: " << num(*c.overrides.grasp_radius) << '\n';
  }
  if (c.overrides.place_tolerance) {
    o << "  place_tolerance: " << num(*c.overrides.place_tolerance) << '\n';
  }
  o << "regime:\n"
    << "  kind: " << dagger::to_string(r.regime) << '\n'
    << "  seed: " << r.master_seed << '\n'
    << "  warmup_demos: " << r.warmup_demos << '\n'
    << "  dagger_iterations: " << r.dagger_iterations << '\n'
    << "  episodes_per_iteration: " << r.episodes_per_iteration << '\n'
    << "  human_step_budget: " << r.human_step_budget << '\n'
    << "  eval_episodes: " << r.eval_episodes << '\n'
    << "  eval_seed: " << r.eval_seed << '\n'
    << "  eval_each_iteration: " << (r.eval_each_iteration ? "true" : "false")
    << '\n';
  if (!c.eval_grid_path.empty()) {
    o << "  eval_grid: " << quoted(c.eval_grid_path) << '\n';
  }
  auto train = [&](const policy::TrainConfig& t) {
    o << "  learning_rate: " << num(t.learning_rate) << '\n'
      << "  batch_size: " << t.batch_size << '\n'
      << "  grad_steps: " << t.grad_steps << '\n'
      << "  hidden_dim: " << t.hidden_dim << '\n';
  };
  o << "train:\n";
  train(r.train);
  o << "  seed: " << r.train.seed << '\n';
  if (r.finetune_steps) o << "  finetune_steps: " << *r.finetune_steps << '\n';
  if (r.finetune_learning_rate) {
    o << "  finetune_learning_rate: " << num(*r.finetune_learning_rate) << '\n';
  }
  if (r.retrain) {
    o << "retrain:\n";
    train(*r.retrain);
  }
  o << "gate:\n"
    << "  epsilon: " << num(r.gate.epsilon) << '\n'
    << "  lambda: " << num(r.gate.lambda) << '\n'
    << "  min_hold: " << r.gate.min_hold << '\n'
    << "  expert: " << dagger::to_string(r.gate.expert) << '\n';
  o << "expert:\n"
    << "  joint_gain: " << num(r.expert.joint_gain) << '\n'
    << "  close_radius: " << num(r.expert.close_radius) << '\n'
    << "  release_radius: " << num(r.expert.release_radius) << '\n'
    << "  base_gain: " << num(r.expert.base_gain) << '\n'
    << "  base_tolerance: " << num(r.expert.base_tolerance) << '\n';
  o << "gains:\n  grab_threshold: " << num(c.gains.grab_threshold) << '\n';
  for (const auto& [mode, g] : c.gains.entries) {
    o << "  " << to_string(mode) << ":\n"
      << "    kp: " << list(g.kp) << '\n'
      << "    kd: " << list(g.kd) << '\n'
      << "    alpha: " << num(g.alpha) << '\n'
      << "    beta_d: " << num(g.beta_d) << '\n';
  }
  const auto flag = [](bool b) { return b ? "true" : "false"; };
  o << "output:\n"
    << "  dir: " << quoted(c.output.dir) << '\n'
    << "  csv: " << flag(c.output.csv) << '\n'
    << "  jsonl: " << flag(c.output.jsonl) << '\n'
    << "  save_dataset: " << flag(c.output.save_dataset) << '\n'
    << "  save_policy: " << flag(c.output.save_policy) << '\n';
  o << "serve:\n"
    << "  listen: " << quoted(c.serve.listen) << '\n'
    << "  port: " << c.serve.port << '\n'
    << "  tick_hz: " << num(c.serve.tick_hz) << '\n'
    << "  snapshot_hz: " << num(c.serve.snapshot_hz) << '\n'
    << "  policy: " << quoted(c.serve.policy) << '\n'
    << "  queue_capacity: " << c.serve.queue_capacity << '\n'
    << "  seed: " << c.serve.seed << '\n';
  return o.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) {
  return sha256_hex(serialize_config(config));
}

}  // namespace gatelab::harness
