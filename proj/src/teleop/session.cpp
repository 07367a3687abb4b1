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

#include "gatelab/teleop/session.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "gatelab/dagger/env.hpp"

namespace gatelab::teleop {
namespace {

using Json = nlohmann::ordered_json;

Json vec_json(const Vec& v) { return std::vector<double>(v.begin(), v.end()); }

double snap_gripper(double aperture) { return aperture < 0.5 ? 0.0 : 1.0; }

}  // namespace

std::string format_snapshot(const Snapshot& s) {
  Json j;
  j["type"] = "snapshot";
  j["tick"] = s.tick;
  j["mode"] = to_string(s.mode);
  j["episode"] = s.episode;
  j["step"] = s.step;
  j["intervention"] = s.intervention;
  j["arms"] = Json::array();
  for (const ArmView& a : s.arms) {
    j["arms"].push_back({{"q", vec_json(a.q)},
                         {"qd", vec_json(a.qd)},
                         {"setpoint", vec_json(a.setpoint)},
                         {"gripper", a.gripper},
                         {"leader_q", vec_json(a.leader_q)},
                         {"leader_qd", vec_json(a.leader_qd)},
                         {"leader_torque", vec_json(a.leader_torque)}});
  }
  j["base_x"] = s.base_x;
  j["base_goal"] = s.base_goal;
  j["objects"] = Json::array();
  for (const sim::ObjectState& o : s.objects) {
    j["objects"].push_back(
        {{"x", o.position.x()}, {"y", o.position.y()}, {"held_by", o.held_by}});
  }
  j["goals"] = Json::array();
  for (const Vec2& g : s.goals) j["goals"].push_back({g.x(), g.y()});
  j["subtasks"] = s.subtasks;
  j["episode_over"] = s.episode_over;
  j["buffered"] = s.buffered;
  j["saved"] = s.saved;
  j["dropped_events"] = s.dropped_events;
  j["last_event_tick"] = s.last_event_tick;
  return j.dump();
}

Session::Session(SessionConfig config) : config_(std::move(config)) {
  config_.spec.validate();
  require(static_cast<bool>(config_.controller), "session: controller missing");
  require(config_.snapshot_every >= 1, "session: snapshot_every must be >= 1");
  for (Mode m : {Mode::kTeleop, Mode::kAutonomous, Mode::kTakeover}) {
    bilateral::gains_for_mode(m, config_.gains).validate();
  }
  reset_episode();
  leaders_at_start_ = leaders_;
}

void Session::reset_episode() {
  world_ = sim::reset(config_.spec, config_.seed + static_cast<std::uint64_t>(episode_));
  const int arms = config_.spec.num_arms();
  leaders_.clear();
  for (const sim::ArmInstance& arm : world_.arms) {
    // the device starts synchronized with the robot
    leaders_.push_back(sim::JointState::at_rest(arm.joints.positions));
  }
  leader_torques_.assign(arms, Vec::Zero(config_.spec.arm.dof()));
  hand_targets_.assign(arms, std::nullopt);
  human_gripper_.assign(arms, 1.0);
  pending_grab_ = false;
}

bool Session::episode_over() const {
  return world_.step_count >= config_.spec.horizon ||
         sim::task_complete(world_, config_.spec);
}

Vec Session::hand_torque(int arm) const {
  const sim::JointState& leader = leaders_[arm];
  if (!hand_targets_[arm]) return Vec::Zero(leader.positions.size());
  const Vec kp = Vec::Constant(leader.positions.size(), config_.hand_kp);
  const Vec kd = bilateral::critical_damping(kp, config_.spec.arm.inertia);
  return kp.cwiseProduct(*hand_targets_[arm] - leader.positions) -
         kd.cwiseProduct(leader.velocities);
}

void Session::apply(const Command& c, TickResult* out) {
  if (c.last_seen_tick >= 0) last_event_tick_ = c.last_seen_tick;
  const sim::ArmModel& model = config_.spec.arm;
  switch (c.kind) {
    case Command::Kind::kDrive: {
      if (c.arm >= config_.spec.num_arms()) return;
      Vec base = hand_targets_[c.arm] ? *hand_targets_[c.arm]
                                      : leaders_[c.arm].positions;
      if (c.joint_deltas) {
        if (c.joint_deltas->size() != model.dof()) return;
        base += c.joint_deltas->cwiseMax(-kMaxDriveDelta).cwiseMin(kMaxDriveDelta);
      } else {
        const Vec2 local = *c.ee_target - sim::arm_origin(world_, config_.spec, c.arm);
        base = sim::inverse_kinematics(model, local);
      }
      hand_targets_[c.arm] = sim::clamp_to_limits(model, base);
      return;
    }
    case Command::Kind::kGripper:
      if (c.arm < config_.spec.num_arms()) human_gripper_[c.arm] = c.gripper;
      return;
    case Command::Kind::kEvent:
      break;
  }

  switch (c.event) {
    case ControlEvent::kSave:
      out->saved.insert(out->saved.end(), buffer_.begin(), buffer_.end());
      saved_ += static_cast<std::int64_t>(buffer_.size());
      buffer_.clear();
      return;
    case ControlEvent::kDiscard:
      buffer_.clear();
      return;
    case ControlEvent::kReset:
      ++episode_;
      reset_episode();
      return;
    default:
      break;
  }
  const Mode next = bilateral::mode_transition(mode_, c.event);
  if (c.event == ControlEvent::kHumanRelease || c.event == ControlEvent::kStartPolicy ||
      c.event == ControlEvent::kStop) {
    hand_targets_.assign(hand_targets_.size(), std::nullopt);
  }
  if (!is_human_driven(mode_) && is_human_driven(next)) {
    // keep whatever the gripper holds at the moment of the handover
    for (std::size_t a = 0; a < world_.arms.size(); ++a) {
      human_gripper_[a] = snap_gripper(world_.arms[a].gripper);
    }
  }
  mode_ = next;
}

Session::TickResult Session::tick(const std::vector<Command>& commands) {
  TickResult out;
  ++tick_;
  const Mode before = mode_;
  bool data_event = false;

  if (pending_grab_) {
    pending_grab_ = false;
    Command grab;
    grab.event = ControlEvent::kHumanGrab;
    apply(grab, &out);
  }
  for (const Command& c : commands) {
    apply(c, &out);
    data_event = data_event ||
                 (c.kind == Command::Kind::kEvent && is_data_utility(c.event));
  }
  leaders_at_start_ = leaders_;

  const sim::TaskSpec& spec = config_.spec;
  const sim::ArmModel& model = spec.arm;
  // the leader device shares the robot's arm model
  const sim::ArmModel& device = model;
  const double dt = spec.dt;
  const int arms = spec.num_arms();
  const bool running = mode_ != Mode::kIdle && !episode_over();

  auto record = [&](const Vec& obs, const Vec& action, Source source) {
    Transition t;
    t.episode = episode_;
    t.step = world_.step_count;
    t.task = spec.id;
    t.obs = obs;
    t.action = action;
    t.source = source;
    t.mode_at_step = mode_;
    buffer_.push_back(t);
    out.recorded.push_back(std::move(t));
  };

  if (!running) {
    // robot holds still; the device keeps mirroring it so the next
    // engagement starts synchronized
    const bilateral::CouplingGains gains = bilateral::gains_for_mode(
        mode_ == Mode::kIdle ? Mode::kAutonomous : mode_, config_.gains);
    for (int a = 0; a < arms; ++a) {
      const Vec coupling = bilateral::leader_torque(
          leaders_[a], sim::JointState::at_rest(world_.arms[a].joints.positions), gains);
      leader_torques_[a] = coupling;
      const Vec tau = coupling + hand_torque(a) + sim::gravity_torque(device, leaders_[a]);
      leaders_[a] = sim::integrate(device, leaders_[a], tau, dt);
    }
  } else if (mode_ == Mode::kAutonomous) {
    const bilateral::CouplingGains gains =
        bilateral::gains_for_mode(Mode::kAutonomous, config_.gains);
    const Vec obs = dagger::observe(world_, spec);
    const Vec action =
        dagger::finalize_action(config_.controller(world_, obs), spec);
    record(obs, action, Source::kPolicy);
    const sim::WorldState before_step = world_;
    world_ = dagger::apply_action(world_, spec, action).world;
    for (int a = 0; a < arms; ++a) {
      // reversed roles: the device mirrors the robot
      const Vec coupling =
          bilateral::leader_torque(leaders_[a], before_step.arms[a].joints, gains);
      leader_torques_[a] = coupling;
      const Vec tau = coupling + hand_torque(a) +
                      sim::gravity_torque(device, leaders_[a]);
      leaders_[a] = sim::integrate(device, leaders_[a], tau, dt);
    }
    for (int a = 0; a < arms; ++a) {
      if (hand_targets_[a] &&
          bilateral::deviation_exceeds(leaders_[a], world_.arms[a].joints,
                                       config_.gains.grab_threshold)) {
        pending_grab_ = true;
      }
    }
  } else {
    const bilateral::CouplingGains gains = bilateral::gains_for_mode(mode_, config_.gains);
    const Vec obs = dagger::observe(world_, spec);
    Vec label = Vec::Zero(dagger::action_dim(spec));
    sim::StepInput input;
    Eigen::Index i = 0;
    for (int a = 0; a < arms; ++a) {
      const sim::ArmInstance& arm = world_.arms[a];
      label.segment(i, model.dof()) = leaders_[a].positions - arm.setpoint;
      i += model.dof();
      if (spec.has_gripper()) label[i++] = human_gripper_[a];
      input.torques.push_back(bilateral::compensated_torque(
          bilateral::follower_torque(leaders_[a], arm.joints, gains), model,
          arm.joints));
      input.gripper.push_back(human_gripper_[a]);
    }
    label = dagger::finalize_action(label, spec);
    record(obs, label, Source::kHuman);

    for (int a = 0; a < arms; ++a) {
      const Vec coupling =
          bilateral::leader_torque(leaders_[a], world_.arms[a].joints, gains);
      leader_torques_[a] = coupling;
      const Vec tau = coupling + hand_torque(a) +
                      sim::gravity_torque(device, leaders_[a]);
      leaders_[a] = sim::integrate(device, leaders_[a], tau, dt);
    }
    sim::WorldState stepped = sim::step(world_, spec, input, dt).world;
    // keep the set point consistent with the recorded delta
    Eigen::Index k = 0;
    for (int a = 0; a < arms; ++a) {
      stepped.arms[a].setpoint = sim::clamp_to_limits(
          model, world_.arms[a].setpoint + label.segment(k, model.dof()));
      k += model.dof() + (spec.has_gripper() ? 1 : 0);
    }
    world_ = std::move(stepped);
  }

  if (mode_ != before || data_event || tick_ % config_.snapshot_every == 0 ||
      tick_ == 1) {
    out.snapshot = snapshot();
  }
  return out;
}

Snapshot Session::snapshot() const {
  Snapshot s;
  s.tick = tick_;
  s.mode = mode_;
  s.episode = episode_;
  s.step = world_.step_count;
  s.intervention = is_human_driven(mode_);
  for (std::size_t a = 0; a < world_.arms.size(); ++a) {
    const sim::ArmInstance& arm = world_.arms[a];
    s.arms.push_back({arm.joints.positions, arm.joints.velocities, arm.setpoint,
                      arm.gripper, leaders_[a].positions, leaders_[a].velocities,
                      leader_torques_[a]});
  }
  s.base_x = world_.base_x;
  s.base_goal = world_.base_goal;
  s.objects = world_.objects;
  s.goals = world_.goals;
  s.subtasks = sim::success(world_, config_.spec);
  s.episode_over = episode_over();
  s.buffered = static_cast<std::int64_t>(buffer_.size());
  s.saved = saved_;
  s.dropped_events = dropped_;
  s.last_event_tick = last_event_tick_;
  return s;
}

}  // namespace gatelab::teleop
