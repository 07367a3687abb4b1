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

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "gatelab/dagger/env.hpp"
#include "gatelab/dagger/expert.hpp"
#include "gatelab/harness/dataset_io.hpp"
#include "gatelab/teleop/server.hpp"

namespace gatelab::teleop {
namespace {

namespace fs = std::filesystem;
namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using Json = nlohmann::json;
using namespace std::chrono_literals;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("gatelab_teleop_" + name);
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

harness::ExperimentConfig config_for(const std::string& task) {
  return harness::parse_config("task:\n  id: " + task + "\n");
}

SessionConfig session_config(const std::string& task = "reach2d") {
  return make_session_config(config_for(task));
}

Command event(ControlEvent e, std::int64_t seen = -1) {
  Command c;
  c.event = e;
  c.last_seen_tick = seen;
  return c;
}

Command drive(int arm, Vec deltas) {
  Command c;
  c.kind = Command::Kind::kDrive;
  c.arm = arm;
  c.joint_deltas = std::move(deltas);
  return c;
}

// --- protocol ---------------------------------------------------------------

TEST(Protocol, ParsesEveryFrameKind) {
  const Command e = parse_command(R"({"type":"event","event":"HUMAN_GRAB","last_seen_tick":41})");
  EXPECT_EQ(e.kind, Command::Kind::kEvent);
  EXPECT_EQ(e.event, ControlEvent::kHumanGrab);
  EXPECT_EQ(e.last_seen_tick, 41);

  const Command d = parse_command(R"({"type":"drive","arm":1,"joint_deltas":[0.1,-0.2]})");
  EXPECT_EQ(d.kind, Command::Kind::kDrive);
  EXPECT_EQ(d.arm, 1);
  ASSERT_TRUE(d.joint_deltas);
  EXPECT_EQ(*d.joint_deltas, Vec2(0.1, -0.2));

  const Command t = parse_command(R"({"type":"drive","ee_target":[0.5,1.25]})");
  ASSERT_TRUE(t.ee_target);
  EXPECT_EQ(*t.ee_target, Vec2(0.5, 1.25));
  EXPECT_EQ(t.arm, 0);

  const Command g = parse_command(R"({"type":"gripper","arm":0,"command":0})");
  EXPECT_EQ(g.kind, Command::Kind::kGripper);
  EXPECT_EQ(g.gripper, 0.0);
}

TEST(Protocol, FormatParsesBack) {
  for (const Command& c :
       {event(ControlEvent::kSave, 7), drive(0, Vec2(0.125, -0.5)), [] {
          Command g;
          g.kind = Command::Kind::kGripper;
          g.gripper = 0.25;
          return g;
        }()}) {
    EXPECT_EQ(format_command(parse_command(format_command(c))), format_command(c));
  }
  for (ControlEvent e : kAllEvents) {
    EXPECT_EQ(parse_command(format_command(event(e))).event, e);
  }
}

TEST(Protocol, RejectsMalformedFrames) {
  for (const char* bad : {
           "not json",
           "[1,2]",
           R"({"event":"SAVE"})",
           R"({"type":"teleport"})",
           R"({"type":"event","event":"JUMP"})",
           R"({"type":"event","event":"SAVE","extra":1})",
           R"({"type":"drive","arm":0})",
           R"({"type":"drive","joint_deltas":[0.1,0.1],"ee_target":[1,1]})",
           R"({"type":"drive","joint_deltas":["a"]})",
           R"({"type":"drive","ee_target":[1]})",
           R"({"type":"drive","arm":-1,"joint_deltas":[0,0]})",
           R"({"type":"gripper","command":1.5})",
           R"({"type":"gripper"})",
           R"({"type":"event","event":"SAVE","last_seen_tick":"x"})",
       }) {
    EXPECT_THROW(parse_command(bad), std::invalid_argument) << bad;
  }
}

TEST(EventQueue, DropsOldestWhenFullAndCounts) {
  EventQueue q(3);
  for (int i = 0; i < 5; ++i) q.push(event(ControlEvent::kSave, i));
  EXPECT_EQ(q.dropped(), 2);
  const std::vector<Command> got = q.drain();
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0].last_seen_tick, 2);
  EXPECT_EQ(got[2].last_seen_tick, 4);
  EXPECT_TRUE(q.drain().empty());
}

// --- session ----------------------------------------------------------------

TEST(Session, IdleRecordsNothingAndHoldsTheRobot) {
  Session s(session_config());
  const sim::WorldState start = s.world();
  for (int i = 0; i < 20; ++i) EXPECT_TRUE(s.tick({}).recorded.empty());
  EXPECT_EQ(s.mode(), Mode::kIdle);
  EXPECT_EQ(s.world(), start);
  EXPECT_EQ(s.tick_count(), 20);
}

TEST(Session, AutonomousRecordsPolicyActions) {
  const SessionConfig config = session_config("pickplace2d");
  Session s(config);
  s.tick({event(ControlEvent::kStartPolicy)});
  for (int i = 0; i < 30; ++i) {
    const sim::WorldState before = s.world();
    const Session::TickResult r = s.tick({});
    ASSERT_EQ(r.recorded.size(), 1u);
    const Transition& t = r.recorded[0];
    EXPECT_EQ(t.source, Source::kPolicy);
    EXPECT_EQ(t.mode_at_step, Mode::kAutonomous);
    EXPECT_EQ(t.obs, dagger::observe(before, config.spec));
    EXPECT_EQ(t.action, dagger::finalize_action(
                            dagger::expert_action({}, before, config.spec), config.spec));
  }
}

TEST(Session, HumanLabelIsClampedLeaderOffset) {
  const SessionConfig config = session_config();
  Session s(config);
  s.tick({event(ControlEvent::kEngageTeleop)});
  ASSERT_EQ(s.mode(), Mode::kTeleop);
  const double bound = config.spec.max_joint_delta;
  for (int i = 0; i < 40; ++i) {
    const Vec setpoint = s.world().arms[0].setpoint;
    const Session::TickResult r = s.tick({drive(0, Vec2(0.2, -0.1))});
    ASSERT_EQ(r.recorded.size(), 1u);
    EXPECT_EQ(r.recorded[0].source, Source::kHuman);
    const Vec offset = s.leaders_at_tick_start()[0].positions - setpoint;
    for (Eigen::Index j = 0; j < offset.size(); ++j) {
      EXPECT_EQ(r.recorded[0].action[j], std::clamp(offset[j], -bound, bound));
    }
  }
  // the follower went where the operator pushed
  EXPECT_GT(s.world().arms[0].joints.positions[0], 0.2);
}

TEST(Session, SourceLabelsFollowModeAcrossAScriptedSession) {
  Session s(session_config("pickplace2d"));
  std::vector<std::vector<Command>> script(260);
  script[0] = {event(ControlEvent::kEngageTeleop)};
  script[20] = {drive(0, Vec2(0.1, 0.1))};
  script[40] = {event(ControlEvent::kStartPolicy)};
  script[90] = {event(ControlEvent::kHumanGrab)};
  script[120] = {event(ControlEvent::kHumanRelease)};
  script[150] = {event(ControlEvent::kStop)};
  script[160] = {event(ControlEvent::kEngageTeleop)};
  script[200] = {event(ControlEvent::kStop), event(ControlEvent::kStartPolicy)};
  std::set<Mode> seen;
  for (const auto& commands : script) {
    for (const Transition& t : s.tick(commands).recorded) {
      seen.insert(t.mode_at_step);
      EXPECT_EQ(t.source, is_human_driven(t.mode_at_step) ? Source::kHuman : Source::kPolicy);
      EXPECT_NE(t.mode_at_step, Mode::kIdle);
    }
  }
  EXPECT_EQ(seen.size(), 3u);
}

TEST(Session, GrabTakesOverOnTheNextTickWithoutALeaderJump) {
  Session s(session_config("pickplace2d"));
  s.tick({event(ControlEvent::kStartPolicy)});
  for (int i = 0; i < 50; ++i) s.tick({});
  const std::vector<sim::JointState> mirrored = s.leaders();
  const Session::TickResult r = s.tick({event(ControlEvent::kHumanGrab)});
  EXPECT_EQ(s.mode(), Mode::kTakeover);
  ASSERT_EQ(r.recorded.size(), 1u);
  EXPECT_EQ(r.recorded[0].source, Source::kHuman);
  EXPECT_EQ(r.recorded[0].mode_at_step, Mode::kTakeover);
  ASSERT_EQ(s.leaders_at_tick_start().size(), mirrored.size());
  EXPECT_EQ(s.leaders_at_tick_start()[0].positions, mirrored[0].positions);
  EXPECT_EQ(s.leaders_at_tick_start()[0].velocities, mirrored[0].velocities);
  ASSERT_TRUE(r.snapshot);
  EXPECT_TRUE(r.snapshot->intervention);
}

TEST(Session, LeaderMirrorsTheFollowerInAutonomous) {
  SessionConfig config = session_config("kitchen_lite");
  // a slow, steady policy: 0.2 rad/s on every joint, gripper open
  const sim::TaskSpec spec = config.spec;
  config.controller = [spec](const sim::WorldState&, const Vec&) {
    Vec a = Vec::Constant(dagger::action_dim(spec), 0.002);
    a[spec.arm.dof()] = 1.0;
    return a;
  };
  Session s(config);
  s.tick({event(ControlEvent::kStartPolicy)});
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const Session::TickResult r = s.tick({});
    ASSERT_EQ(r.recorded.size(), 1u);
    EXPECT_EQ(r.recorded[0].source, Source::kPolicy);
    if (i < 100) continue;  // convergence
    const Vec gap = s.leaders()[0].positions - s.world().arms[0].joints.positions;
    worst = std::max(worst, gap.cwiseAbs().maxCoeff());
  }
  EXPECT_LT(worst, 0.05);
}

TEST(Session, LeaderSettlesOnTheRobotOnceItStops) {
  Session s(session_config("pickplace2d"));
  s.tick({event(ControlEvent::kStartPolicy)});
  while (!s.snapshot().episode_over) s.tick({});
  for (int i = 0; i < 300; ++i) s.tick({});
  const Vec gap = s.leaders()[0].positions - s.world().arms[0].joints.positions;
  EXPECT_LT(gap.cwiseAbs().maxCoeff(), 1e-3);
  s.tick({event(ControlEvent::kStop)});
  for (int i = 0; i < 100; ++i) s.tick({});
  EXPECT_LT((s.leaders()[0].positions - s.world().arms[0].joints.positions)
                .cwiseAbs()
                .maxCoeff(),
            1e-3);
}

TEST(Session, PushingTheLeaderAwayTriggersTakeover) {
  const SessionConfig config = session_config();
  Session s(config);
  s.tick({event(ControlEvent::kStartPolicy)});
  for (int i = 0; i < 20; ++i) s.tick({});
  int ticks = 0;
  while (s.mode() == Mode::kAutonomous && ticks < 200) {
    s.tick({drive(0, Vec2(0.25, 0.0))});
    ++ticks;
  }
  EXPECT_EQ(s.mode(), Mode::kTakeover);
  EXPECT_GT(ticks, 1);
}

TEST(Session, DataUtilitiesLeaveTheModeAlone) {
  Session s(session_config());
  s.tick({event(ControlEvent::kStartPolicy)});
  for (int i = 0; i < 9; ++i) s.tick({});
  EXPECT_EQ(s.buffer().size(), 10u);
  Session::TickResult r = s.tick({event(ControlEvent::kSave)});
  EXPECT_EQ(s.mode(), Mode::kAutonomous);
  EXPECT_EQ(r.saved.size(), 10u);
  EXPECT_EQ(s.buffer().size(), 1u);  // this tick's step, after the flush
  ASSERT_TRUE(r.snapshot);
  EXPECT_EQ(r.snapshot->saved, 10);

  for (int i = 0; i < 4; ++i) s.tick({});
  s.tick({event(ControlEvent::kDiscard)});
  EXPECT_EQ(s.mode(), Mode::kAutonomous);
  EXPECT_EQ(s.buffer().size(), 1u);

  s.tick({event(ControlEvent::kReset)});
  EXPECT_EQ(s.mode(), Mode::kAutonomous);
  EXPECT_EQ(s.snapshot().episode, 1);
  EXPECT_EQ(s.world().goals, sim::reset(s.config().spec, s.config().seed + 1).goals);
}

TEST(Session, EpisodeEndsByItselfAndWaitsForReset) {
  Session s(session_config());
  s.tick({event(ControlEvent::kStartPolicy)});
  int ticks = 0;
  while (!s.snapshot().episode_over && ticks < 2000) {
    s.tick({});
    ++ticks;
  }
  ASSERT_TRUE(s.snapshot().episode_over);
  EXPECT_TRUE(sim::task_complete(s.world(), s.config().spec));
  const std::size_t recorded = s.buffer().size();
  for (int i = 0; i < 10; ++i) s.tick({});
  EXPECT_EQ(s.buffer().size(), recorded);
}

TEST(Session, SnapshotsCarryTheirTickAndFixedFields) {
  SessionConfig config = session_config("bitransport2d");
  config.snapshot_every = 4;
  Session s(config);
  std::vector<std::int64_t> periodic;
  for (int i = 0; i < 12; ++i) {
    const Session::TickResult r = s.tick({});
    if (r.snapshot) {
      EXPECT_EQ(r.snapshot->tick, s.tick_count());
      periodic.push_back(r.snapshot->tick);
    }
  }
  EXPECT_EQ(periodic, (std::vector<std::int64_t>{1, 4, 8, 12}));
  const Json j = Json::parse(format_snapshot(s.snapshot()));
  for (const char* key : {"tick", "mode", "arms", "objects", "goals", "subtasks",
                          "intervention", "buffered", "last_event_tick"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["arms"].size(), 2u);
  EXPECT_EQ(j["mode"], "IDLE");
}

TEST(Session, IgnoresCommandsForMissingArms) {
  Session s(session_config());
  s.tick({event(ControlEvent::kEngageTeleop)});
  const sim::JointState leader = s.leaders()[0];
  Command far = drive(3, Vec2(0.2, 0.2));
  s.tick({far, drive(0, Vec::Zero(5))});
  EXPECT_EQ(s.mode(), Mode::kTeleop);
  EXPECT_LT((s.leaders()[0].positions - leader.positions).norm(), 1e-3);
}

// --- replay -----------------------------------------------------------------

Transcript scripted_transcript() {
  Transcript t;
  t.task = "pickplace2d";
  t.seed = 11;
  t.entries = {{2, event(ControlEvent::kStartPolicy)},
               {40, event(ControlEvent::kHumanGrab)},
               {41, drive(0, Vec2(0.05, -0.05))},
               {41, event(ControlEvent::kSave)},
               {70, event(ControlEvent::kHumanRelease)},
               {90, event(ControlEvent::kReset)},
               {120, event(ControlEvent::kStop)}};
  t.final_tick = 130;
  return t;
}

TEST(Replay, TranscriptTextRoundTrips) {
  const Transcript t = scripted_transcript();
  std::string text = format_transcript_header(t.task, t.seed) + "\n";
  for (const TranscriptEntry& e : t.entries) text += format_transcript_entry(e) + "\n";
  text += format_transcript_end(t.final_tick) + "\n";
  const Transcript back = parse_transcript(text);
  EXPECT_EQ(back.task, t.task);
  EXPECT_EQ(back.seed, t.seed);
  EXPECT_EQ(back.final_tick, t.final_tick);
  ASSERT_EQ(back.entries.size(), t.entries.size());
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].tick, t.entries[i].tick);
    EXPECT_EQ(format_command(back.entries[i].command), format_command(t.entries[i].command));
  }
  EXPECT_THROW(parse_transcript(format_transcript_end(3)), std::runtime_error);
}

TEST(Replay, MatchesALiveSessionByteForByte) {
  const Transcript t = scripted_transcript();
  SessionConfig config = session_config("pickplace2d");
  config.seed = t.seed;
  Session live(config);
  std::string log;
  std::size_t next = 0;
  for (std::int64_t tick = 1; tick <= t.final_tick; ++tick) {
    std::vector<Command> commands;
    while (next < t.entries.size() && t.entries[next].tick == tick) {
      commands.push_back(t.entries[next++].command);
    }
    for (const Transition& x : live.tick(commands).recorded) {
      log += harness::format_transition(x) + "\n";
    }
  }
  const ReplayResult a = replay(session_config("pickplace2d"), t);
  const ReplayResult b = replay(session_config("pickplace2d"), t);
  EXPECT_FALSE(log.empty());
  EXPECT_EQ(a.transition_log, log);
  EXPECT_EQ(a.transition_log, b.transition_log);
  EXPECT_EQ(a.final_mode, Mode::kIdle);
  EXPECT_EQ(a.saved.size(), 39u);  // ticks 2..40
}

// --- server -----------------------------------------------------------------

class Client {
 public:
  explicit Client(int port) : ws_(ioc_) {
    beast::get_lowest_layer(ws_).connect(
        net::ip::tcp::endpoint(net::ip::make_address("127.0.0.1"),
                               static_cast<unsigned short>(port)));
    ws_.handshake("127.0.0.1", "/");
  }

  void send(const std::string& text) { ws_.write(net::buffer(text)); }
  void send(const Command& c) { send(format_command(c)); }

  // Next frame, or nothing once `wait` passes or the server closes.
  std::optional<Json> next(std::chrono::milliseconds wait = 2000ms) {
    beast::flat_buffer buffer;
    bool done = false;
    beast::error_code result;
    ws_.async_read(buffer, [&](beast::error_code ec, std::size_t) {
      done = true;
      result = ec;
    });
    ioc_.restart();
    ioc_.run_for(wait);
    if (!done) {
      beast::get_lowest_layer(ws_).cancel();
      ioc_.restart();
      ioc_.run();
      return std::nullopt;
    }
    if (result) {
      closed_ = true;
      return std::nullopt;
    }
    return Json::parse(beast::buffers_to_string(buffer.data()));
  }

  template <typename Pred>
  std::optional<Json> until(Pred pred, std::chrono::milliseconds wait = 3000ms) {
    const auto deadline = std::chrono::steady_clock::now() + wait;
    while (std::chrono::steady_clock::now() < deadline && !closed_) {
      auto frame = next(std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now()));
      if (frame && pred(*frame)) return frame;
    }
    return std::nullopt;
  }

  std::optional<Json> snapshot_in(const std::string& mode) {
    return until([&](const Json& j) { return j["type"] == "snapshot" && j["mode"] == mode; });
  }

  void close() {
    beast::error_code ec;
    ws_.close(websocket::close_code::normal, ec);
  }
  bool closed() const { return closed_; }

 private:
  net::io_context ioc_;
  websocket::stream<beast::tcp_stream> ws_;
  bool closed_ = false;
};

std::unique_ptr<TeleopServer> start_server(const std::string& task, const fs::path& dir,
                                           std::optional<fs::path> record = {}) {
  const harness::ExperimentConfig c = config_for(task);
  ServerOptions o;
  o.port = 0;
  o.output_dir = dir;
  o.record = std::move(record);
  o.config_hash = harness::config_hash(c);
  auto server = std::make_unique<TeleopServer>(make_session_config(c), o);
  server->start();
  return server;
}

TEST(Server, HelloDescribesTheSession) {
  const fs::path dir = scratch("hello");
  auto server = start_server("bitransport2d", dir);
  Client client(server->port());
  const auto hello = client.next();
  ASSERT_TRUE(hello);
  EXPECT_EQ((*hello)["type"], "hello");
  EXPECT_EQ((*hello)["schema_version"], kProtocolVersion);
  EXPECT_EQ((*hello)["task"], "bitransport2d");
  EXPECT_EQ((*hello)["arms"], 2);
  EXPECT_EQ((*hello)["dof"], 2);
  EXPECT_EQ((*hello)["tick_hz"], 100.0);
  EXPECT_EQ((*hello)["snapshot_every"], 5);
  EXPECT_EQ((*hello)["subtasks"].size(), 1u);
  EXPECT_EQ((*hello)["config_hash"], harness::config_hash(config_for("bitransport2d")));
  const auto snap = client.until([](const Json& j) { return j["type"] == "snapshot"; });
  ASSERT_TRUE(snap);
  EXPECT_EQ((*snap)["mode"], "IDLE");
}

TEST(Server, TakeoverIsVisibleWithinThreeTicks) {
  const fs::path dir = scratch("latency");
  auto server = start_server("reach2d", dir);
  Client client(server->port());
  client.send(event(ControlEvent::kStartPolicy));
  ASSERT_TRUE(client.snapshot_in("AUTONOMOUS"));
  // freshest snapshot we have seen is tick T
  const auto seen = client.until([](const Json& j) { return j["type"] == "snapshot"; });
  ASSERT_TRUE(seen);
  const std::int64_t t = (*seen)["tick"];
  client.send(event(ControlEvent::kHumanGrab, t));
  const auto taken = client.snapshot_in("TAKEOVER");
  ASSERT_TRUE(taken);
  EXPECT_LE((*taken)["tick"].get<std::int64_t>(), t + 3);
  EXPECT_EQ((*taken)["last_event_tick"], t);
  EXPECT_TRUE((*taken)["intervention"].get<bool>());
}

TEST(Server, SecondOperatorGetsBusy) {
  const fs::path dir = scratch("busy");
  auto server = start_server("reach2d", dir);
  Client first(server->port());
  ASSERT_TRUE(first.next());
  Client second(server->port());
  const auto frame = second.next();
  ASSERT_TRUE(frame);
  EXPECT_EQ((*frame)["type"], "busy");
  EXPECT_FALSE(second.until([](const Json&) { return true; }, 500ms));
  EXPECT_TRUE(second.closed());
  // the operator is unaffected
  EXPECT_TRUE(first.until([](const Json& j) { return j["type"] == "snapshot"; }));
}

TEST(Server, MalformedFramesGetAnErrorAndChangeNothing) {
  const fs::path dir = scratch("errors");
  auto server = start_server("reach2d", dir);
  Client client(server->port());
  ASSERT_TRUE(client.next());
  for (const char* bad : {"{oops", R"({"type":"drive","arm":4,"joint_deltas":[0,0]})",
                          R"({"type":"drive","joint_deltas":[0,0,0]})"}) {
    client.send(bad);
    const auto err = client.until([](const Json& j) { return j["type"] == "error"; });
    ASSERT_TRUE(err) << bad;
    EXPECT_FALSE((*err)["message"].get<std::string>().empty());
  }
  const auto snap = client.until([](const Json& j) { return j["type"] == "snapshot"; });
  ASSERT_TRUE(snap);
  EXPECT_EQ((*snap)["mode"], "IDLE");
  EXPECT_EQ((*snap)["buffered"], 0);
}

TEST(Server, DisconnectPausesAndKeepsTheBufferFlagged) {
  const fs::path dir = scratch("disconnect");
  auto server = start_server("reach2d", dir);
  {
    Client client(server->port());
    client.send(event(ControlEvent::kStartPolicy));
    ASSERT_TRUE(client.until([](const Json& j) {
      return j["type"] == "snapshot" && j["buffered"].get<int>() >= 10;
    }));
    client.close();
  }
  for (int i = 0; i < 100 && !fs::exists(dir / "unsaved.jsonl"); ++i) {
    std::this_thread::sleep_for(20ms);
  }
  ASSERT_TRUE(fs::exists(dir / "unsaved.jsonl"));
  EXPECT_FALSE(harness::read_manifest(dir / "dataset.jsonl").complete);

  Client again(server->port());
  const auto snap = again.until([](const Json& j) { return j["type"] == "snapshot"; });
  ASSERT_TRUE(snap);
  EXPECT_EQ((*snap)["mode"], "IDLE");
  const std::int64_t buffered = (*snap)["buffered"];
  EXPECT_GE(buffered, 10);
  again.close();
  server->stop();

  const Dataset unsaved = harness::read_dataset(dir / "unsaved.jsonl");
  EXPECT_EQ(static_cast<std::int64_t>(unsaved.size()), buffered);
  for (const Transition& t : unsaved) EXPECT_EQ(t.source, Source::kPolicy);
  EXPECT_TRUE(harness::read_dataset(dir / "dataset.jsonl").empty());
}

TEST(Server, SaveWritesTheDatasetAndReplayReproducesTheLog) {
  const fs::path dir = scratch("save");
  auto server = start_server("pickplace2d", dir, dir / "session.transcript");
  Client client(server->port());
  client.send(event(ControlEvent::kStartPolicy));
  ASSERT_TRUE(client.until([](const Json& j) {
    return j["type"] == "snapshot" && j["buffered"].get<int>() >= 20;
  }));
  client.send(event(ControlEvent::kHumanGrab));
  ASSERT_TRUE(client.snapshot_in("TAKEOVER"));
  client.send(drive(0, Vec2(0.1, 0.0)));
  client.send(event(ControlEvent::kSave));
  const auto saved = client.until([](const Json& j) {
    return j["type"] == "snapshot" && j["saved"].get<int>() > 0;
  });
  ASSERT_TRUE(saved);
  EXPECT_EQ((*saved)["mode"], "TAKEOVER");
  client.send(event(ControlEvent::kStop));
  ASSERT_TRUE(client.snapshot_in("IDLE"));
  client.close();
  server->stop();

  const Dataset data = harness::read_dataset(dir / "dataset.jsonl");
  EXPECT_EQ(static_cast<std::int64_t>(data.size()), (*saved)["saved"].get<std::int64_t>());
  const harness::DatasetManifest m = harness::read_manifest(dir / "dataset.jsonl");
  EXPECT_EQ(m.transitions, static_cast<std::int64_t>(data.size()));
  EXPECT_EQ(m.human + m.policy, m.transitions);
  EXPECT_GT(m.human, 0);
  EXPECT_GT(m.policy, 0);

  const Transcript t = load_transcript(dir / "session.transcript");
  const ReplayResult r = replay(session_config("pickplace2d"), t);
  EXPECT_EQ(r.transition_log, slurp(dir / "transitions.jsonl"));
  ASSERT_EQ(r.saved.size(), data.size());
  EXPECT_EQ(harness::format_transition(r.saved.back()),
            harness::format_transition(data.back()));
}

TEST(Server, TwoSessionsAreIndependent) {
  const fs::path a_dir = scratch("two_a"), b_dir = scratch("two_b");
  auto a = start_server("reach2d", a_dir);
  auto b = start_server("kitchen_lite", b_dir);
  ASSERT_NE(a->port(), b->port());
  Client ca(a->port()), cb(b->port());
  EXPECT_EQ((*ca.next())["task"], "reach2d");
  EXPECT_EQ((*cb.next())["task"], "kitchen_lite");
  ca.send(event(ControlEvent::kStartPolicy));
  ASSERT_TRUE(ca.until([](const Json& j) {
    return j["type"] == "snapshot" && j["buffered"].get<int>() >= 5;
  }));
  ca.send(event(ControlEvent::kSave));
  ASSERT_TRUE(ca.until([](const Json& j) {
    return j["type"] == "snapshot" && j["saved"].get<int>() > 0;
  }));
  const auto other = cb.until([](const Json& j) { return j["type"] == "snapshot"; });
  ASSERT_TRUE(other);
  EXPECT_EQ((*other)["mode"], "IDLE");
  EXPECT_EQ((*other)["buffered"], 0);
  ca.close();
  cb.close();
  a->stop();
  b->stop();
  EXPECT_FALSE(harness::read_dataset(a_dir / "dataset.jsonl").empty());
  EXPECT_TRUE(harness::read_dataset(b_dir / "dataset.jsonl").empty());
  EXPECT_EQ(harness::read_manifest(b_dir / "dataset.jsonl").task, "kitchen_lite");
}

}  // namespace
}  // namespace gatelab::teleop
