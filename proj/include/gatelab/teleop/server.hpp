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

#ifndef GATELAB_TELEOP_SERVER_HPP_
#define GATELAB_TELEOP_SERVER_HPP_

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gatelab/harness/config.hpp"
#include "gatelab/teleop/session.hpp"

namespace gatelab::teleop {

// Bounded multi-producer queue between network readers and the physics
// loop. When full, the oldest command is dropped and counted.
class EventQueue {
 public:
  explicit EventQueue(std::size_t capacity = 256);

  void push(Command command);
  std::vector<Command> drain();
  std::int64_t dropped() const;
  std::size_t capacity() const { return capacity_; }

 private:
  const std::size_t capacity_;
  mutable std::mutex mutex_;
  std::deque<Command> items_;
  std::int64_t dropped_ = 0;
};

// Transcript: a header line, then one line per applied command with the tick
// it was applied at, then an end line carrying the final tick.
struct TranscriptEntry {
  std::int64_t tick = 0;
  Command command;
};

struct Transcript {
  std::string task;
  std::uint64_t seed = 0;
  std::vector<TranscriptEntry> entries;
  std::int64_t final_tick = 0;
};

std::string format_transcript_header(const std::string& task, std::uint64_t seed);
std::string format_transcript_entry(const TranscriptEntry& entry);
std::string format_transcript_end(std::int64_t final_tick);
Transcript parse_transcript(const std::string& text);
Transcript load_transcript(const std::filesystem::path& path);

struct ReplayResult {
  std::string transition_log;  // one formatted transition per line
  Dataset saved;
  std::vector<Snapshot> snapshots;
  Mode final_mode = Mode::kIdle;
};

// Re-runs a transcript against a fresh session, tick by tick.
ReplayResult replay(const SessionConfig& config, const Transcript& transcript);

// Session for `serve`: the configured task and gains, with the policy file
// (or the scripted expert when none is set) as the AUTONOMOUS controller.
// Relative policy paths resolve against base_dir.
SessionConfig make_session_config(const harness::ExperimentConfig& config,
                                  const std::filesystem::path& base_dir = ".");

struct ServerOptions {
  std::string listen = "127.0.0.1";
  int port = 8765;  // 0 picks a free port
  double tick_hz = 100.0;
  int queue_capacity = 256;
  std::filesystem::path output_dir = "runs/serve";
  std::optional<std::filesystem::path> record;
  std::string config_hash;
};

// Live session service: one operator connection at a time, physics owned by
// a dedicated thread, snapshots pushed to the operator as text frames.
class TeleopServer {
 public:
  TeleopServer(SessionConfig session, ServerOptions options);
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  // Binds and starts the network and physics threads.
  void start();
  // Stops both threads, persisting an unsaved buffer to unsaved.jsonl.
  void stop();
  int port() const;
  std::int64_t tick() const { return tick_.load(); }
  bool running() const { return running_.load(); }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<std::int64_t> tick_{0};
  std::atomic<bool> running_{false};
};

}  // namespace gatelab::teleop

#endif  // GATELAB_TELEOP_SERVER_HPP_
