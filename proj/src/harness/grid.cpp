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

#include "gatelab/harness/grid.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace gatelab::harness {
namespace {

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("eval_grid", "grid line " + std::to_string(line) + ": " + what,
                    line);
}

double to_double(const std::string& s, int line) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    fail(line, "bad number '" + s + "'");
  }
  return v;
}

std::vector<double> to_list(const std::string& s, int line) {
  std::vector<double> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_double(item, line));
  return out;
}

Vec2 to_point(const std::string& s, int line) {
  const std::vector<double> v = to_list(s, line);
  if (v.size() != 2) fail(line, "expected x,y but got '" + s + "'");
  return {v[0], v[1]};
}

// Indexed keys (object0, object1, ...) collected then checked for density.
std::vector<Vec2> dense(const std::map<int, Vec2>& items, const char* what,
                        int line) {
  std::vector<Vec2> out;
  for (const auto& [index, p] : items) {
    if (index != static_cast<int>(out.size())) {
      fail(line, std::string(what) + " indices must start at 0 without gaps");
    }
    out.push_back(p);
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

GridFile parse_grid(const std::string& text) {
  GridFile grid;
  bool have_version = false, have_task = false;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) {
      raw.erase(hash);
    }
    std::istringstream words(raw);
    std::string head;
    if (!(words >> head)) continue;
    if (head == "version") {
      int version = 0;
      if (!(words >> version) || version != 1) fail(line, "unsupported version");
      have_version = true;
    } else if (head == "task") {
      std::string id;
      words >> id;
      try {
        grid.task = sim::parse_task_id(id);
      } catch (const ConfigError&) {
        fail(line, "unknown task '" + id + "'");
      }
      have_task = true;
    } else if (head == "entry") {
      dagger::GridEntry entry;
      bool have_seed = false;
      std::map<int, Vec2> objects, goals;
      std::string token;
      while (words >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) fail(line, "expected key=value: " + token);
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (key == "seed") {
          std::uint64_t seed = 0;
          const auto [end, ec] =
              std::from_chars(value.data(), value.data() + value.size(), seed);
          if (ec != std::errc() || end != value.data() + value.size()) {
            fail(line, "bad seed '" + value + "'");
          }
          entry.seed = seed;
          have_seed = true;
        } else if (key.rfind("object", 0) == 0) {
          objects[static_cast<int>(to_double(key.substr(6), line))] =
              to_point(value, line);
        } else if (key.rfind("goal", 0) == 0) {
          goals[static_cast<int>(to_double(key.substr(4), line))] =
              to_point(value, line);
        } else if (key == "joints") {
          const std::vector<double> q = to_list(value, line);
          entry.placement.start_joints = Eigen::Map<const Vec>(
              q.data(), static_cast<Eigen::Index>(q.size()));
        } else if (key == "base_goal") {
          entry.placement.base_goal = to_double(value, line);
        } else {
          fail(line, "unknown key '" + key + "'");
        }
      }
      if (!have_seed) fail(line, "entry without seed");
      if (!objects.empty()) {
        entry.placement.objects = dense(objects, "object", line);
      }
      if (!goals.empty()) entry.placement.goals = dense(goals, "goal", line);
      grid.entries.push_back(std::move(entry));
    } else {
      fail(line, "unknown directive '" + head + "'");
    }
  }
  if (!have_version) fail(line, "missing version line");
  if (!have_task) fail(line, "missing task line");
  if (grid.entries.empty()) fail(line, "grid has no entries");

  // every placement must fit the task layout
  const sim::TaskSpec spec = sim::make_task(grid.task);
  for (const dagger::GridEntry& e : grid.entries) {
    try {
      sim::reset(spec, e.seed, e.placement);
    } catch (const ContractViolation& err) {
      throw ConfigError("eval_grid", err.what());
    }
  }
  return grid;
}

GridFile load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("regime.eval_grid", "cannot open " + path.string());
  }
  std::stringstream text;
  text << in.rdbuf();
  return parse_grid(text.str());
}

std::string format_grid(const GridFile& grid) {
  std::ostringstream out;
  out << "version 1\ntask " << sim::to_string(grid.task) << '\n';
  for (const dagger::GridEntry& e : grid.entries) {
    out << "entry seed=" << e.seed;
    const sim::Placement& p = e.placement;
    if (p.start_joints) {
      out << " joints=";
      for (Eigen::Index j = 0; j < p.start_joints->size(); ++j) {
        out << (j ? "," : "") << fmt((*p.start_joints)[j]);
      }
    }
    if (p.base_goal) out << " base_goal=" << fmt(*p.base_goal);
    if (p.objects) {
      for (std::size_t i = 0; i < p.objects->size(); ++i) {
        out << " object" << i << '=' << fmt((*p.objects)[i].x()) << ','
            << fmt((*p.objects)[i].y());
      }
    }
    if (p.goals) {
      for (std::size_t i = 0; i < p.goals->size(); ++i) {
        out << " goal" << i << '=' << fmt((*p.goals)[i].x()) << ','
            << fmt((*p.goals)[i].y());
      }
    }
    out << '\n';
  }
  return out.str();
}

GridFile make_grid(const sim::TaskSpec& spec, int n, std::uint64_t seed) {
  GridFile grid;
  grid.task = spec.id;
  for (int k = 0; k < n; ++k) {
    dagger::GridEntry entry;
    entry.seed = seed + static_cast<std::uint64_t>(k);
    const sim::WorldState w = sim::reset(spec, entry.seed);
    entry.placement.start_joints = w.arms.front().joints.positions;
    if (spec.mobile) entry.placement.base_goal = w.base_goal;
    std::vector<Vec2> objects, goals;
    for (const sim::ObjectState& o : w.objects) objects.push_back(o.position);
    if (!objects.empty()) entry.placement.objects = objects;
    if (!w.goals.empty()) entry.placement.goals = w.goals;
    grid.entries.push_back(std::move(entry));
  }
  return grid;
}

}  // namespace gatelab::harness
