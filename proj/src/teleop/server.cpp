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

#include "gatelab/teleop/server.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <nlohmann/json.hpp>

#include "gatelab/dagger/env.hpp"
#include "gatelab/harness/dataset_io.hpp"
#include "gatelab/harness/runner.hpp"

namespace gatelab::teleop {
namespace {

namespace beast = boost::beast;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Json = nlohmann::ordered_json;

// Outgoing frames beyond this are dropped oldest-first for slow clients.
constexpr std::size_t kMaxPendingFrames = 64;

std::string frame(const Json& j) { return j.dump() + '\n'; }

}  // namespace

EventQueue::EventQueue(std::size_t capacity) : capacity_(capacity) {
  require(capacity >= 1, "EventQueue: capacity must be >= 1");
}

void EventQueue::push(Command command) {
  std::lock_guard<std::mutex> lock(mutex_);
  if (items_.size() == capacity_) {
    items_.pop_front();
    ++dropped_;
  }
  items_.push_back(std::move(command));
}

std::vector<Command> EventQueue::drain() {
  std::lock_guard<std::mutex> lock(mutex_);
  std::vector<Command> out(std::make_move_iterator(items_.begin()),
                           std::make_move_iterator(items_.end()));
  items_.clear();
  return out;
}

std::int64_t EventQueue::dropped() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return dropped_;
}

std::string format_transcript_header(const std::string& task, std::uint64_t seed) {
  Json j;
  j["type"] = "transcript";
  j["schema_version"] = kProtocolVersion;
  j["task"] = task;
  j["seed"] = seed;
  return j.dump();
}

std::string format_transcript_entry(const TranscriptEntry& entry) {
  Json j;
  j["type"] = "command";
  j["tick"] = entry.tick;
  j["frame"] = Json::parse(format_command(entry.command));
  return j.dump();
}

std::string format_transcript_end(std::int64_t final_tick) {
  Json j;
  j["type"] = "end";
  j["tick"] = final_tick;
  return j.dump();
}

Transcript parse_transcript(const std::string& text) {
  Transcript t;
  bool have_header = false;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  try {
    while (std::getline(in, line)) {
      ++number;
      if (line.empty()) continue;
      const Json j = Json::parse(line);
      const std::string type = j.at("type");
      if (type == "transcript") {
        if (j.at("schema_version") != kProtocolVersion) {
          throw std::runtime_error("unsupported transcript version");
        }
        t.task = j.at("task");
        t.seed = j.at("seed");
        have_header = true;
      } else if (type == "command") {
        TranscriptEntry e;
        e.tick = j.at("tick");
        e.command = parse_command(j.at("frame").dump());
        if (!t.entries.empty() && e.tick < t.entries.back().tick) {
          throw std::runtime_error("ticks go backwards");
        }
        t.entries.push_back(std::move(e));
        t.final_tick = std::max(t.final_tick, t.entries.back().tick);
      } else if (type == "end") {
        t.final_tick = std::max<std::int64_t>(t.final_tick, j.at("tick"));
      } else {
        throw std::runtime_error("unknown record type " + type);
      }
    }
  } catch (const std::exception& e) {
    throw std::runtime_error("transcript line " + std::to_string(number) + ": " +
                             e.what());
  }
  if (!have_header) throw std::runtime_error("transcript: missing header");
  return t;
}

Transcript load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_transcript(text.str());
}

ReplayResult replay(const SessionConfig& config, const Transcript& transcript) {
  SessionConfig c = config;
  c.seed = transcript.seed;
  Session session(std::move(c));
  ReplayResult out;
  std::size_t next = 0;
  for (std::int64_t tick = 1; tick <= transcript.final_tick; ++tick) {
    std::vector<Command> commands;
    while (next < transcript.entries.size() &&
           transcript.entries[next].tick == tick) {
      commands.push_back(transcript.entries[next++].command);
    }
    Session::TickResult r = session.tick(commands);
    for (const Transition& t : r.recorded) {
      out.transition_log += harness::format_transition(t) + '\n';
    }
    out.saved.insert(out.saved.end(), r.saved.begin(), r.saved.end());
    if (r.snapshot) out.snapshots.push_back(std::move(*r.snapshot));
  }
  out.final_mode = session.mode();
  return out;
}

SessionConfig make_session_config(const harness::ExperimentConfig& config,
                                  const std::filesystem::path& base_dir) {
  SessionConfig s;
  s.spec = config.task_spec();
  s.gains = config.gains;
  s.seed = config.serve.seed;
  if (config.serve.policy.empty()) {
    s.controller = dagger::expert_controller(config.regime.expert, s.spec);
  } else {
    std::filesystem::path path(config.serve.policy);
    if (path.is_relative()) path = base_dir / path;
    s.controller = dagger::policy_controller(harness::load_policy_for(path, s.spec));
  }
  if (!(config.serve.snapshot_hz > 0.0)) {
    throw ConfigError("serve.snapshot_hz", "snapshot_hz must be positive");
  }
  s.snapshot_every = std::max(
      1, static_cast<int>(std::lround(config.serve.tick_hz / config.serve.snapshot_hz)));
  return s;
}

// ---------------------------------------------------------------------------

struct TeleopServer::Impl {
  class Connection;

  Impl(TeleopServer* owner, SessionConfig config, ServerOptions opts)
      : owner(owner),
        session(std::move(config)),
        options(std::move(opts)),
        queue(static_cast<std::size_t>(options.queue_capacity)),
        acceptor(ioc) {}

  void accept();
  void on_open(const std::shared_ptr<Connection>& c);
  void on_message(const std::shared_ptr<Connection>& c, const std::string& text);
  void on_close(const std::shared_ptr<Connection>& c);
  void physics_loop();
  void broadcast(std::string text);
  void write_manifest();

  TeleopServer* owner;
  Session session;
  ServerOptions options;
  EventQueue queue;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::thread net_thread;
  std::thread physics_thread;
  std::atomic<bool> stopping{false};
  std::atomic<bool> operator_left{false};
  std::shared_ptr<Connection> operator_conn;  // io thread only
  std::ofstream transitions;
  std::ofstream record;
  std::int64_t saved_total = 0;
  std::int64_t saved_human = 0;
  std::int64_t saved_policy = 0;
};

class TeleopServer::Impl::Connection
    : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Impl* impl)
      : ws_(std::move(socket)), impl_(impl) {}

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->impl_->on_open(self);
    });
  }

  // Must run on the io thread.
  void send(std::string text, bool close_after = false) {
    if (closed_) return;
    pending_.push_back(std::move(text));
    close_after_ = close_after_ || close_after;
    // never drop the frame being written (index 0 while writing)
    while (pending_.size() > kMaxPendingFrames) {
      pending_.erase(pending_.begin() + (writing_ ? 1 : 0));
    }
    if (!writing_) write_next();
  }

  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec,
                                                        std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->impl_->on_close(self);
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->impl_->on_message(self, text);
      self->read();
    });
  }

  void close() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::normal,
                    [self = shared_from_this()](beast::error_code) {});
  }

 private:
  void write_next() {
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(pending_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->pending_.pop_front();
                      if (ec) {
                        self->writing_ = false;
                        self->closed_ = true;
                        return;
                      }
                      if (!self->pending_.empty()) {
                        self->write_next();
                        return;
                      }
                      self->writing_ = false;
                      if (self->close_after_) self->close();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  Impl* impl_;
  beast::flat_buffer buffer_;
  std::deque<std::string> pending_;
  bool writing_ = false;
  bool close_after_ = false;
  bool closed_ = false;
};

void TeleopServer::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<Connection>(std::move(socket), this)->run();
    accept();
  });
}

void TeleopServer::Impl::on_open(const std::shared_ptr<Connection>& c) {
  if (operator_conn) {
    Json busy;
    busy["type"] = "busy";
    busy["message"] = "session already has an operator";
    c->send(frame(busy), /*close_after=*/true);
    return;
  }
  operator_conn = c;
  const sim::TaskSpec& spec = session.config().spec;
  Json hello;
  hello["type"] = "hello";
  hello["schema_version"] = kProtocolVersion;
  hello["task"] = sim::to_string(spec.id);
  hello["arms"] = spec.num_arms();
  hello["dof"] = spec.arm.dof();
  hello["subtasks"] = spec.subtask_names;
  hello["tick_hz"] = options.tick_hz;
  hello["snapshot_every"] = session.config().snapshot_every;
  hello["link_lengths"] = spec.arm.link_lengths;
  std::vector<std::vector<double>> mounts;
  for (const Vec2& m : spec.mounts) mounts.push_back({m.x(), m.y()});
  hello["mounts"] = mounts;
  hello["config_hash"] = options.config_hash;
  c->send(frame(hello));
  c->read();
}

void TeleopServer::Impl::on_message(const std::shared_ptr<Connection>& c,
                                    const std::string& text) {
  if (c != operator_conn) return;
  std::istringstream lines(text);
  std::string line;
  const sim::TaskSpec& spec = session.config().spec;
  while (std::getline(lines, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Command cmd = parse_command(line);
      if (cmd.kind != Command::Kind::kEvent && cmd.arm >= spec.num_arms()) {
        throw std::invalid_argument("arm index out of range");
      }
      if (cmd.joint_deltas && cmd.joint_deltas->size() != spec.arm.dof()) {
        throw std::invalid_argument("joint_deltas needs one entry per joint");
      }
      queue.push(std::move(cmd));
    } catch (const std::invalid_argument& e) {
      Json err;
      err["type"] = "error";
      err["message"] = e.what();
      err["tick"] = owner->tick();
      c->send(frame(err));
    }
  }
}

void TeleopServer::Impl::on_close(const std::shared_ptr<Connection>& c) {
  if (c != operator_conn) return;
  operator_conn.reset();
  // a vanished operator pauses the robot
  Command stop;
  stop.event = ControlEvent::kStop;
  queue.push(stop);
  operator_left = true;
}

void TeleopServer::Impl::broadcast(std::string text) {
  net::post(ioc, [this, text = std::move(text)]() mutable {
    if (operator_conn) operator_conn->send(std::move(text));
  });
}

void TeleopServer::Impl::write_manifest() {
  harness::DatasetManifest m;
  const sim::TaskSpec& spec = session.config().spec;
  m.task = sim::to_string(spec.id);
  m.task_spec_hash = harness::task_spec_hash(spec);
  m.config_hash = options.config_hash;
  m.seeds = {session.config().seed};
  m.transitions = saved_total;
  m.human = saved_human;
  m.policy = saved_policy;
  m.episodes = session.snapshot().episode + 1;
  m.complete = !session.unsaved();
  harness::write_manifest(options.output_dir / "dataset.jsonl", m);
}

void TeleopServer::Impl::physics_loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(1.0 / options.tick_hz));
  auto next = clock::now();
  while (!stopping.load()) {
    next += period;
    std::this_thread::sleep_until(next);
    std::vector<Command> commands = queue.drain();
    session.set_dropped_events(queue.dropped());
    Session::TickResult r = session.tick(commands);
    owner->tick_.store(session.tick_count());

    if (record.is_open()) {
      for (const Command& c : commands) {
        record << format_transcript_entry({session.tick_count(), c}) << '\n';
      }
      record.flush();
    }
    for (const Transition& t : r.recorded) {
      transitions << harness::format_transition(t) << '\n';
    }
    if (operator_left.load() && session.mode() == Mode::kIdle) {
      operator_left = false;
      if (session.unsaved()) {
        harness::write_dataset(options.output_dir / "unsaved.jsonl", session.buffer());
        write_manifest();
      }
    }
    if (!r.saved.empty()) {
      harness::append_dataset(options.output_dir / "dataset.jsonl", r.saved);
      for (const Transition& t : r.saved) {
        ++saved_total;
        ++(t.source == Source::kHuman ? saved_human : saved_policy);
      }
      write_manifest();
    }
    if (r.snapshot) broadcast(frame(Json::parse(format_snapshot(*r.snapshot))));
  }
}

TeleopServer::TeleopServer(SessionConfig session, ServerOptions options)
    : impl_(std::make_unique<Impl>(this, std::move(session), std::move(options))) {
  require(impl_->options.tick_hz > 0, "server: tick_hz must be positive");
}

TeleopServer::~TeleopServer() { stop(); }

void TeleopServer::start() {
  Impl& s = *impl_;
  std::filesystem::create_directories(s.options.output_dir);
  s.transitions.open(s.options.output_dir / "transitions.jsonl", std::ios::trunc);
  if (!s.transitions) {
    throw std::runtime_error("cannot write to " + s.options.output_dir.string());
  }
  // a fresh session starts a fresh dataset file
  std::ofstream(s.options.output_dir / "dataset.jsonl", std::ios::trunc);
  if (s.options.record) {
    s.record.open(*s.options.record, std::ios::trunc);
    if (!s.record) throw std::runtime_error("cannot write " + s.options.record->string());
    s.record << format_transcript_header(
                    std::string(sim::to_string(s.session.config().spec.id)),
                    s.session.config().seed)
             << '\n';
  }
  const tcp::endpoint endpoint(net::ip::make_address(s.options.listen),
                               static_cast<unsigned short>(s.options.port));
  s.acceptor.open(endpoint.protocol());
  s.acceptor.set_option(net::socket_base::reuse_address(true));
  s.acceptor.bind(endpoint);
  s.acceptor.listen();
  s.accept();
  running_ = true;
  s.net_thread = std::thread([&s] { s.ioc.run(); });
  s.physics_thread = std::thread([&s] { s.physics_loop(); });
}

void TeleopServer::stop() {
  if (!running_.exchange(false)) return;
  Impl& s = *impl_;
  s.stopping = true;
  if (s.physics_thread.joinable()) s.physics_thread.join();
  net::post(s.ioc, [&s] {
    beast::error_code ec;
    s.acceptor.close(ec);
    if (s.operator_conn) s.operator_conn->close();
  });
  // give the close handshake a moment, then stop the loop outright
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  s.ioc.stop();
  if (s.net_thread.joinable()) s.net_thread.join();

  if (s.session.unsaved()) {
    harness::write_dataset(s.options.output_dir / "unsaved.jsonl", s.session.buffer());
  }
  s.write_manifest();
  if (s.record.is_open()) {
    s.record << format_transcript_end(s.session.tick_count()) << '\n';
    s.record.close();
  }
  s.transitions.close();
}

int TeleopServer::port() const {
  return impl_->acceptor.is_open() ? impl_->acceptor.local_endpoint().port()
                                   : impl_->options.port;
}

}  // namespace gatelab::teleop
