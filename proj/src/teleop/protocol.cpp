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

#include "gatelab/teleop/protocol.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace gatelab::teleop {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void reject(const std::string& what) {
  throw std::invalid_argument(what);
}

void only_keys(const Json& j, std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.count(item.key())) reject("unknown field '" + item.key() + "'");
  }
}

std::vector<double> finite_list(const Json& j, const char* name) {
  if (!j.is_array()) reject(std::string(name) + " must be a list");
  std::vector<double> out;
  for (const Json& v : j) {
    if (!v.is_number()) reject(std::string(name) + " must hold numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x)) reject(std::string(name) + " must be finite");
    out.push_back(x);
  }
  return out;
}

}  // namespace

Command parse_command(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    reject("frame is not valid JSON");
  }
  if (!j.is_object()) reject("frame must be a JSON object");
  if (!j.contains("type") || !j["type"].is_string()) reject("missing type");

  Command c;
  if (j.contains("last_seen_tick")) {
    if (!j["last_seen_tick"].is_number_integer()) reject("last_seen_tick must be an integer");
    c.last_seen_tick = j["last_seen_tick"].get<std::int64_t>();
  }
  auto read_arm = [&] {
    if (!j.contains("arm")) return;
    if (!j["arm"].is_number_integer() || j["arm"].get<int>() < 0) {
      reject("arm must be a non-negative integer");
    }
    c.arm = j["arm"].get<int>();
  };

  const std::string type = j["type"];
  if (type == "event") {
    only_keys(j, {"type", "event", "last_seen_tick"});
    if (!j.contains("event") || !j["event"].is_string()) reject("missing event");
    try {
      c.event = parse_event(j["event"].get<std::string>());
    } catch (const std::invalid_argument&) {
      reject("unknown event '" + j["event"].get<std::string>() + "'");
    }
    c.kind = Command::Kind::kEvent;
  } else if (type == "drive") {
    only_keys(j, {"type", "arm", "joint_deltas", "ee_target", "last_seen_tick"});
    c.kind = Command::Kind::kDrive;
    read_arm();
    const bool deltas = j.contains("joint_deltas");
    const bool target = j.contains("ee_target");
    if (deltas == target) reject("drive needs exactly one of joint_deltas, ee_target");
    if (deltas) {
      const std::vector<double> d = finite_list(j["joint_deltas"], "joint_deltas");
      c.joint_deltas =
          Eigen::Map<const Vec>(d.data(), static_cast<Eigen::Index>(d.size()));
    } else {
      const std::vector<double> t = finite_list(j["ee_target"], "ee_target");
      if (t.size() != 2) reject("ee_target must be [x, y]");
      c.ee_target = Vec2(t[0], t[1]);
    }
  } else if (type == "gripper") {
    only_keys(j, {"type", "arm", "command", "last_seen_tick"});
    c.kind = Command::Kind::kGripper;
    read_arm();
    if (!j.contains("command") || !j["command"].is_number()) {
      reject("gripper needs a numeric command");
    }
    c.gripper = j["command"].get<double>();
    if (!(c.gripper >= 0.0 && c.gripper <= 1.0)) reject("gripper command must lie in [0, 1]");
  } else {
    reject("unknown frame type '" + type + "'");
  }
  return c;
}

std::string format_command(const Command& c) {
  Json j;
  switch (c.kind) {
    case Command::Kind::kEvent:
      j["type"] = "event";
      j["event"] = to_string(c.event);
      break;
    case Command::Kind::kDrive:
      j["type"] = "drive";
      j["arm"] = c.arm;
      if (c.joint_deltas) {
        j["joint_deltas"] = std::vector<double>(c.joint_deltas->begin(),
                                                c.joint_deltas->end());
      } else if (c.ee_target) {
        j["ee_target"] = {c.ee_target->x(), c.ee_target->y()};
      }
      break;
    case Command::Kind::kGripper:
      j["type"] = "gripper";
      j["arm"] = c.arm;
      j["command"] = c.gripper;
      break;
  }
  if (c.last_seen_tick >= 0) j["last_seen_tick"] = c.last_seen_tick;
  return j.dump();
}

}  // namespace gatelab::teleop
