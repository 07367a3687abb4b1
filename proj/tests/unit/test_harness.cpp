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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "gatelab/harness/config.hpp"
#include "gatelab/harness/dataset_io.hpp"
#include "gatelab/harness/grid.hpp"
#include "gatelab/harness/report.hpp"
#include "gatelab/harness/runner.hpp"

namespace gatelab::harness {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("gatelab_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kTiny = R"(task:
  id: reach2d
regime:
  kind: BATCHED_DAGGER
  seed: 3
  warmup_demos: 2
  dagger_iterations: 1
  episodes_per_iteration: 2
  eval_episodes: 3
train:
  grad_steps: 40
  hidden_dim: 8
  finetune_steps: 10
)";

ConfigError config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "config accepted:\n" << text;
  return ConfigError("", "");
}

TEST(Config, MinimalUsesDefaults) {
  const ExperimentConfig c = parse_config("task:\n  id: pickplace2d\n");
  EXPECT_EQ(c.task, sim::TaskId::kPickPlace2d);
  EXPECT_EQ(c.regime.regime, dagger::Regime::kBatchedDagger);
  EXPECT_EQ(c.regime.warmup_demos, 10);
  EXPECT_EQ(c.regime.gate.epsilon, 0.02);
  EXPECT_EQ(c.regime.gate.lambda, 1.0);
  EXPECT_EQ(c.regime.gate.min_hold, 5);
  EXPECT_EQ(c.regime.train.learning_rate, 1e-3);
  EXPECT_EQ(c.gains.grab_threshold, 0.15);
  EXPECT_EQ(c.serve.tick_hz, 100.0);
  EXPECT_EQ(c.serve.snapshot_hz, 20.0);
}

TEST(Config, MissingTaskIdNamesField) {
  EXPECT_EQ(config_error("regime:\n  kind: OFFLINE_BC\n").field(), "task.id");
  EXPECT_EQ(config_error("task:\n  horizon: 10\n").field(), "task.id");
}

TEST(Config, UnknownKeysRejectedWithLine) {
  const ConfigError e = config_error("task:\n  id: reach2d\ntrain:\n  lr: 0.1\n");
  EXPECT_EQ(e.field(), "train.lr");
  EXPECT_EQ(e.line(), 4);
  const ConfigError top = config_error("task:\n  id: reach2d\nworkers: 4\n");
  EXPECT_EQ(top.field(), "workers");
  EXPECT_EQ(top.line(), 3);
}

TEST(Config, TypeErrorsCarryLine) {
  const ConfigError e =
      config_error("task:\n  id: reach2d\ngate:\n  epsilon: 0.1\n  lambda: lots\n");
  EXPECT_EQ(e.field(), "gate.lambda");
  EXPECT_EQ(e.line(), 5);
  EXPECT_EQ(config_error("task:\n  id: reach2d\ngate:\n  lambda: 2\n").field(),
            "gate.lambda");
  EXPECT_EQ(config_error("task:\n  id: moon\n").field(), "task.id");
  EXPECT_EQ(config_error("task: [1, 2\n").line(), 2);
}

TEST(Config, OfflineRejectsIterationsAndHumanExpert) {
  const ConfigError e = config_error(
      "task:\n  id: reach2d\nregime:\n  kind: OFFLINE_BC\n  dagger_iterations: 3\n");
  EXPECT_EQ(e.field(), "regime.dagger_iterations");
  EXPECT_EQ(e.line(), 5);
  EXPECT_EQ(config_error("task:\n  id: reach2d\ngate:\n  expert: human\n").field(),
            "gate.expert");
}

TEST(Config, OfflineDefaultsToNoIterations) {
  const ExperimentConfig c =
      parse_config("task:\n  id: reach2d\nregime:\n  kind: OFFLINE_BC\n");
  EXPECT_EQ(c.regime.dagger_iterations, 0);
}

TEST(Config, RoundTripIsIdempotent) {
  const std::string text = std::string(kTiny) +
                           "gate:\n  epsilon: .inf\n  lambda: 0.25\n"
                           "retrain:\n  grad_steps: 77\n"
                           "gains:\n  TELEOP:\n    kp: [12, 14]\n    alpha: 0.5\n";
  const ExperimentConfig c = parse_config(text);
  const std::string once = serialize_config(c);
  const std::string twice = serialize_config(parse_config(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(config_hash(c), config_hash(parse_config(once)));
  EXPECT_TRUE(std::isinf(parse_config(once).regime.gate.epsilon));
  ASSERT_TRUE(c.regime.retrain.has_value());
  EXPECT_EQ(c.regime.retrain->grad_steps, 77);
  EXPECT_EQ(c.regime.retrain->hidden_dim, 8);  // inherited from train
}

TEST(Config, KpWithoutKdStaysCriticallyDamped) {
  const ExperimentConfig c = parse_config(
      "task:\n  id: reach2d\ngains:\n  TELEOP:\n    kp: [12, 14]\n");
  const auto& g = c.gains.entries.at(Mode::kTeleop);
  const sim::ArmModel arm = sim::make_task(sim::TaskId::kReach2d).arm;
  EXPECT_NEAR(g.kd[0], 2 * std::sqrt(12 * arm.inertia[0]), 1e-12);
  EXPECT_EQ(config_error("task:\n  id: reach2d\ngains:\n  TELEOP:\n    kp: [1, 2, 3]\n")
                .field(),
            "gains.TELEOP.kp");
}

TEST(Config, HashChangesWithContent) {
  const ExperimentConfig a = parse_config(kTiny);
  ExperimentConfig b = a;
  b.regime.master_seed += 1;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Grid, FormatParseRoundTrip) {
  const sim::TaskSpec spec = sim::make_task(sim::TaskId::kBiTransport2d);
  const GridFile g = make_grid(spec, 5, 70);
  const GridFile back = parse_grid(format_grid(g));
  EXPECT_EQ(back.task, g.task);
  ASSERT_EQ(back.entries.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(sim::reset(spec, back.entries[i].seed, back.entries[i].placement),
              sim::reset(spec, g.entries[i].seed, g.entries[i].placement));
  }
}

TEST(Grid, PinnedPlacementsMatchSeededReset) {
  const sim::TaskSpec spec = sim::make_task(sim::TaskId::kKitchenLite);
  for (const dagger::GridEntry& e : make_grid(spec, 4, 10).entries) {
    EXPECT_EQ(sim::reset(spec, e.seed, e.placement), sim::reset(spec, e.seed));
    // different seed, same pinned placement
    const sim::WorldState moved = sim::reset(spec, e.seed + 999, e.placement);
    EXPECT_EQ(moved.objects, sim::reset(spec, e.seed).objects);
  }
}

TEST(Grid, ParseErrorsCarryLine) {
  try {
    parse_grid("version 1\ntask reach2d\nentry seed=1 goal0=1,2\nentry seed=x\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_grid("version 2\ntask reach2d\n"), ConfigError);
}

TEST(Grid, ShippedEighteenEntryGridEvaluatesExactlyThoseEntries) {
  const fs::path file = fs::path(GATELAB_SOURCE_DIR) / "data/eval_grids/pickplace2d_18.grid";
  const GridFile g = load_grid(file);
  ASSERT_EQ(g.entries.size(), 18u);
  const sim::TaskSpec spec = sim::make_task(g.task);
  const dagger::EvalResult r = dagger::evaluate_controller(
      dagger::expert_controller(dagger::ScriptedExpert{}, spec), spec, g.entries);
  EXPECT_EQ(r.episodes.size(), 18u);
  // entry i starts exactly where the file says
  for (std::size_t i = 0; i < 18; ++i) {
    const sim::WorldState w = sim::reset(spec, g.entries[i].seed, g.entries[i].placement);
    EXPECT_EQ(w.objects[0].position, (*g.entries[i].placement.objects)[0]);
  }

  const std::string cfg = "task:\n  id: pickplace2d\nregime:\n  eval_grid: "
                          "data/eval_grids/pickplace2d_18.grid\n";
  const ExperimentConfig c = parse_config(cfg, GATELAB_SOURCE_DIR);
  ASSERT_TRUE(c.regime.eval_grid.has_value());
  EXPECT_EQ(c.regime.eval_episodes, 18);
  EXPECT_THROW(parse_config(cfg + "  eval_episodes: 50\n", GATELAB_SOURCE_DIR), ConfigError);
  EXPECT_THROW(parse_config("task:\n  id: reach2d\nregime:\n  eval_grid: "
                            "data/eval_grids/pickplace2d_18.grid\n",
                            GATELAB_SOURCE_DIR),
               ConfigError);
}

dagger::RegimeReport sample_report() {
  dagger::RegimeReport r;
  r.config_hash = "abc123";
  r.task = "kitchen_lite";
  r.regime = "BATCHED_DAGGER";
  r.master_seed = 4;
  r.eval_seed = 99;
  r.eval_episodes = 3;
  r.subtask_names = {"open_lid", "pick_ball", "place_in_pot"};
  r.warmup_discarded = 1;
  r.rows.push_back({0, "warmup", 100, 100, 0.0, {}, 0.0, 0.5});
  r.rows.push_back({1, "dagger", 130, 130, 0.1 + 0.2, {2.0 / 3, 1.0 / 3, 0.0}, 201.25, 1.75});
  r.rows.push_back({2, "retrain", 130, 130, 0.0, {1.0, 2.0 / 3, 1.0 / 3}, 180.0, 3.0});
  return r;
}

TEST(Report, CsvParsesBackToSameValues) {
  const dagger::RegimeReport r = sample_report();
  const std::string csv = format_report_csv(r);
  const dagger::RegimeReport back = parse_report_csv(csv);
  EXPECT_EQ(format_report_csv(back), csv);
  EXPECT_EQ(back.rows[1].intervention_fraction, 0.1 + 0.2);
  EXPECT_EQ(back.rows[1].subtask_success[0], 2.0 / 3);
  EXPECT_TRUE(back.rows[0].subtask_success.empty());
  EXPECT_EQ(back.subtask_names, r.subtask_names);
  EXPECT_EQ(back.warmup_discarded, 1);
  // unevaluated cells stay empty
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  std::getline(lines, line);
  std::getline(lines, line);
  EXPECT_EQ(line, "0,warmup,100,100,0,,,,,0.5");
}

TEST(Report, JsonlParsesBackToSameValues) {
  const dagger::RegimeReport r = sample_report();
  const dagger::RegimeReport back = parse_report_jsonl(format_report_jsonl(r));
  EXPECT_TRUE(same_values(back, r));
  EXPECT_EQ(format_report_jsonl(back), format_report_jsonl(r));
}

TEST(Report, WallClockMasking) {
  dagger::RegimeReport a = sample_report(), b = sample_report();
  b.rows[2].wall_clock_s = 99.0;
  EXPECT_FALSE(same_values(a, b));
  EXPECT_TRUE(same_values(without_wall_clock(a), without_wall_clock(b)));
}

TEST(Compare, IdenticalReportsHaveZeroDeltas) {
  const Comparison c = compare({sample_report(), sample_report()}, {"a", "b"});
  ASSERT_EQ(c.rows.size(), 2u);
  for (double d : c.rows[1].success_delta) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(c.rows[1].human_step_ratio, 1.0);
}

TEST(Compare, DeltasAndStepRatio) {
  dagger::RegimeReport offline = sample_report();
  offline.regime = "OFFLINE_BC";
  offline.rows = {{0, "offline", 200, 200, 0.0, {0.5, 0.25, 0.0}, 220.0, 1.0}};
  const Comparison c = compare({offline, sample_report()}, {"off", "bat"});
  EXPECT_DOUBLE_EQ(c.rows[1].success_delta[0], 0.5);
  EXPECT_DOUBLE_EQ(c.rows[1].success_delta[2], 1.0 / 3);
  EXPECT_DOUBLE_EQ(c.rows[1].human_step_ratio, 130.0 / 200.0);
  const std::string table = format_comparison(c);
  EXPECT_NE(table.find("human_step_ratio"), std::string::npos);
  EXPECT_NE(table.find("0.6500"), std::string::npos);
}

TEST(Compare, RefusesMismatchedProtocols) {
  dagger::RegimeReport other = sample_report();
  other.eval_seed = 100;
  try {
    compare({sample_report(), other}, {"a", "b"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "eval_seed");
  }
  other = sample_report();
  other.eval_episodes = 4;
  other.task = "reach2d";
  try {
    compare({sample_report(), other}, {"a", "b"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("task"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("eval_episodes"), std::string::npos);
  }
  other = sample_report();
  other.eval_grid_hash = "ff";
  EXPECT_THROW(compare({sample_report(), other}, {"a", "b"}), ConfigError);
  EXPECT_THROW(compare({sample_report()}, {"a"}), ConfigError);
}

Dataset sample_dataset() {
  const sim::TaskSpec spec = sim::make_task(sim::TaskId::kPickPlace2d);
  Dataset d = dagger::collect_warmup(spec, dagger::ScriptedExpert{}, 2, 5).dataset;
  d[3].source = Source::kPolicy;
  d[3].mode_at_step = Mode::kAutonomous;
  d[4].obs[0] = 0.1 + 0.2;  // not representable in short decimal
  return d;
}

void expect_same(const Dataset& a, const Dataset& b) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].episode, b[i].episode);
    EXPECT_EQ(a[i].step, b[i].step);
    EXPECT_EQ(a[i].task, b[i].task);
    EXPECT_EQ(a[i].obs, b[i].obs);
    EXPECT_EQ(a[i].action, b[i].action);
    EXPECT_EQ(a[i].source, b[i].source);
    EXPECT_EQ(a[i].mode_at_step, b[i].mode_at_step);
  }
}

TEST(DatasetIo, RoundTripIsExact) {
  const fs::path dir = scratch("dataset_rt");
  const Dataset d = sample_dataset();
  write_dataset(dir / "d.jsonl", d);
  expect_same(read_dataset(dir / "d.jsonl"), d);
  const nlohmann::json first = nlohmann::json::parse(format_transition(d[0]));
  for (const char* key : {"episode", "step", "task", "source", "mode", "obs", "action"}) {
    EXPECT_TRUE(first.contains(key)) << key;
  }
  EXPECT_EQ(first["source"], "HUMAN");
}

TEST(DatasetIo, AppendExtends) {
  const fs::path dir = scratch("dataset_append");
  const Dataset d = sample_dataset();
  const Dataset head(d.begin(), d.begin() + 10), tail(d.begin() + 10, d.end());
  append_dataset(dir / "d.jsonl", head);
  append_dataset(dir / "d.jsonl", tail);
  expect_same(read_dataset(dir / "d.jsonl"), d);
}

TEST(DatasetIo, ManifestAndSummary) {
  const fs::path dir = scratch("dataset_manifest");
  const Dataset d = sample_dataset();
  DatasetManifest m = summarize(d);
  EXPECT_EQ(m.transitions, static_cast<std::int64_t>(d.size()));
  EXPECT_EQ(m.policy, 1);
  EXPECT_EQ(m.human, m.transitions - 1);
  EXPECT_EQ(m.episodes, 2);
  m.task = "pickplace2d";
  m.task_spec_hash = task_spec_hash(sim::make_task(sim::TaskId::kPickPlace2d));
  m.seeds = {5, 6};
  write_dataset(dir / "d.jsonl", d);
  write_manifest(dir / "d.jsonl", m);
  EXPECT_EQ(manifest_path(dir / "d.jsonl"), dir / "d.manifest.json");
  const DatasetManifest back = read_manifest(dir / "d.jsonl");
  EXPECT_EQ(back.task_spec_hash, m.task_spec_hash);
  EXPECT_EQ(back.seeds, m.seeds);
  EXPECT_EQ(back.human, m.human);
  EXPECT_NE(inspect_dataset(dir / "d.jsonl").find("transitions: " + std::to_string(d.size())),
            std::string::npos);
}

TEST(DatasetIo, TaskSpecHashSeesEveryField) {
  const sim::TaskSpec a = sim::make_task(sim::TaskId::kReach2d);
  sim::TaskSpec b = a;
  EXPECT_EQ(task_spec_hash(a), task_spec_hash(b));
  b.reach_tolerance += 1e-9;
  EXPECT_NE(task_spec_hash(a), task_spec_hash(b));
  b = a;
  b.arm.damping[1] = 0.2;
  EXPECT_NE(task_spec_hash(a), task_spec_hash(b));
}

TEST(DatasetIo, MalformedLineNamesLine) {
  const fs::path dir = scratch("dataset_bad");
  std::ofstream(dir / "d.jsonl") << format_transition(sample_dataset()[0]) << "\n{oops\n";
  try {
    read_dataset(dir / "d.jsonl");
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos) << e.what();
  }
}

TEST(Runner, ArtifactsAndDeterminism) {
  const ExperimentConfig c = parse_config(kTiny);
  const fs::path a = scratch("run_a"), b = scratch("run_b");
  RunArtifacts art;
  run_experiment(c, RunOptions{.output_dir = a}, &art);
  run_experiment(c, RunOptions{.output_dir = b});
  for (const char* f : {"config.yaml", "report.csv", "report.jsonl", "dataset.jsonl",
                        "dataset.manifest.json", "policy.pol", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  const auto ra = without_wall_clock(load_report(a / "report.csv"));
  const auto rb = without_wall_clock(load_report(b / "report.csv"));
  EXPECT_EQ(format_report_csv(ra), format_report_csv(rb));
  EXPECT_TRUE(same_values(ra, without_wall_clock(load_report(a / "report.jsonl"))));
  EXPECT_EQ(slurp(a / "dataset.jsonl"), slurp(b / "dataset.jsonl"));
  EXPECT_EQ(slurp(a / "policy.pol"), slurp(b / "policy.pol"));

  const std::string hash = config_hash(c);
  EXPECT_EQ(ra.config_hash, hash);
  EXPECT_EQ(config_hash(load_config(a / "config.yaml")), hash);
  const nlohmann::json manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["config_hash"], hash);
  EXPECT_EQ(manifest["status"], "complete");
  EXPECT_EQ(read_manifest(a / "dataset.jsonl").config_hash, hash);
  EXPECT_EQ(read_manifest(a / "dataset.jsonl").task_spec_hash,
            task_spec_hash(c.task_spec()));

  // the saved policy evaluates to the report's final row
  const dagger::EvalResult eval = evaluate_policy_file(a / "policy.pol", c);
  EXPECT_EQ(eval.subtask_success, ra.rows.back().subtask_success);
}

TEST(Runner, OutputRootEnvironmentOverride) {
  const fs::path root = scratch("root");
  ExperimentConfig c = parse_config(kTiny);
  c.output.dir = "nested/run";
  ::setenv(kOutputRootEnv, root.c_str(), 1);
  EXPECT_EQ(resolve_output_dir(c), root / "nested/run");
  c.output.dir = "/abs/run";
  EXPECT_EQ(resolve_output_dir(c), fs::path("/abs/run"));
  ::unsetenv(kOutputRootEnv);
}

TEST(Runner, PolicyDimensionMismatchIsConfigError) {
  const fs::path dir = scratch("run_dims");
  const ExperimentConfig c = parse_config(kTiny);
  run_experiment(c, RunOptions{.output_dir = dir});
  const ExperimentConfig other = parse_config("task:\n  id: pickplace2d\n");
  EXPECT_THROW(evaluate_policy_file(dir / "policy.pol", other), ConfigError);
}

}  // namespace
}  // namespace gatelab::harness
