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

#include "gatelab/harness/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace gatelab::harness {
namespace {

using dagger::RegimeReport;
using dagger::ReportRow;
using Json = nlohmann::ordered_json;

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

[[noreturn]] void bad(const std::string& what) {
  throw std::runtime_error("report: " + what);
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) bad("bad number '" + s + "'");
  return v;
}

template <typename Int>
Int to_int(const std::string& s) {
  Int v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) bad("bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string format_report_csv(const RegimeReport& r) {
  std::ostringstream o;
  o << "# gatelab-report schema_version=" << r.schema_version
    << " config_hash=" << r.config_hash << " task=" << r.task
    << " regime=" << r.regime << " seed=" << r.master_seed
    << " eval_seed=" << r.eval_seed << " eval_episodes=" << r.eval_episodes
    << " eval_grid=" << (r.eval_grid_hash.empty() ? "-" : r.eval_grid_hash)
    << " subtasks=" << join(r.subtask_names, '|')
    << " warmup_discarded=" << r.warmup_discarded << '\n';
  o << "iteration,phase,dataset_size,human_labeled_steps,intervention_fraction";
  for (const std::string& name : r.subtask_names) o << ",success_" << name;
  o << ",mean_episode_length,wall_clock_s\n";
  for (const ReportRow& row : r.rows) {
    o << row.iteration << ',' << row.phase << ',' << row.dataset_size << ','
      << row.human_labeled_steps << ',' << num(row.intervention_fraction);
    for (std::size_t k = 0; k < r.subtask_names.size(); ++k) {
      o << ',';
      if (!row.subtask_success.empty()) o << num(row.subtask_success[k]);
    }
    o << ',';
    if (!row.subtask_success.empty()) o << num(row.mean_episode_length);
    o << ',' << num(row.wall_clock_s) << '\n';
  }
  return o.str();
}

RegimeReport parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# gatelab-report ", 0) != 0) {
    bad("missing header line");
  }
  std::map<std::string, std::string> header;
  std::istringstream words(line.substr(17));
  std::string word;
  while (words >> word) {
    const auto eq = word.find('=');
    if (eq == std::string::npos) bad("malformed header field '" + word + "'");
    header[word.substr(0, eq)] = word.substr(eq + 1);
  }
  auto field = [&](const std::string& key) {
    auto it = header.find(key);
    if (it == header.end()) bad("header lacks " + key);
    return it->second;
  };
  RegimeReport r;
  r.schema_version = to_int<int>(field("schema_version"));
  r.config_hash = field("config_hash");
  r.task = field("task");
  r.regime = field("regime");
  r.master_seed = to_int<std::uint64_t>(field("seed"));
  r.eval_seed = to_int<std::uint64_t>(field("eval_seed"));
  r.eval_episodes = to_int<int>(field("eval_episodes"));
  r.eval_grid_hash = field("eval_grid") == "-" ? "" : field("eval_grid");
  r.subtask_names = split(field("subtasks"), '|');
  r.warmup_discarded = to_int<int>(field("warmup_discarded"));

  const std::size_t k = r.subtask_names.size();
  if (!std::getline(in, line)) bad("missing column line");
  if (split(line, ',').size() != 7 + k) bad("column count mismatch");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line, ',');
    if (cells.size() != 7 + k) bad("row has " + std::to_string(cells.size()) + " cells");
    ReportRow row;
    row.iteration = to_int<int>(cells[0]);
    row.phase = cells[1];
    row.dataset_size = to_int<std::int64_t>(cells[2]);
    row.human_labeled_steps = to_int<std::int64_t>(cells[3]);
    row.intervention_fraction = to_double(cells[4]);
    if (!cells[5].empty()) {
      for (std::size_t j = 0; j < k; ++j) {
        row.subtask_success.push_back(to_double(cells[5 + j]));
      }
      row.mean_episode_length = to_double(cells[5 + k]);
    }
    row.wall_clock_s = to_double(cells[6 + k]);
    r.rows.push_back(std::move(row));
  }
  return r;
}

std::string format_report_jsonl(const RegimeReport& r) {
  Json header;
  header["type"] = "header";
  header["schema_version"] = r.schema_version;
  header["config_hash"] = r.config_hash;
  header["task"] = r.task;
  header["regime"] = r.regime;
  header["seed"] = r.master_seed;
  header["eval_seed"] = r.eval_seed;
  header["eval_episodes"] = r.eval_episodes;
  header["eval_grid"] = r.eval_grid_hash;
  header["subtasks"] = r.subtask_names;
  header["warmup_discarded"] = r.warmup_discarded;
  std::string out = header.dump() + '\n';
  for (const ReportRow& row : r.rows) {
    Json j;
    j["type"] = "row";
    j["iteration"] = row.iteration;
    j["phase"] = row.phase;
    j["dataset_size"] = row.dataset_size;
    j["human_labeled_steps"] = row.human_labeled_steps;
    j["intervention_fraction"] = row.intervention_fraction;
    if (row.subtask_success.empty()) {
      j["subtask_success"] = nullptr;
      j["mean_episode_length"] = nullptr;
    } else {
      j["subtask_success"] = row.subtask_success;
      j["mean_episode_length"] = row.mean_episode_length;
    }
    j["wall_clock_s"] = row.wall_clock_s;
    out += j.dump() + '\n';
  }
  return out;
}

RegimeReport parse_report_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  RegimeReport r;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const Json j = Json::parse(line);
      const std::string type = j.at("type");
      if (type == "header") {
        r.schema_version = j.at("schema_version");
        r.config_hash = j.at("config_hash");
        r.task = j.at("task");
        r.regime = j.at("regime");
        r.master_seed = j.at("seed");
        r.eval_seed = j.at("eval_seed");
        r.eval_episodes = j.at("eval_episodes");
        r.eval_grid_hash = j.at("eval_grid");
        r.subtask_names = j.at("subtasks").get<std::vector<std::string>>();
        r.warmup_discarded = j.at("warmup_discarded");
        have_header = true;
      } else if (type == "row") {
        if (!have_header) bad("row before header");
        ReportRow row;
        row.iteration = j.at("iteration");
        row.phase = j.at("phase");
        row.dataset_size = j.at("dataset_size");
        row.human_labeled_steps = j.at("human_labeled_steps");
        row.intervention_fraction = j.at("intervention_fraction");
        if (!j.at("subtask_success").is_null()) {
          row.subtask_success = j.at("subtask_success").get<std::vector<double>>();
          row.mean_episode_length = j.at("mean_episode_length");
        }
        row.wall_clock_s = j.at("wall_clock_s");
        r.rows.push_back(std::move(row));
      } else {
        bad("unknown record type " + type);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
  if (!have_header) bad("missing header record");
  return r;
}

RegimeReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path.string());
  std::stringstream text;
  text << in.rdbuf();
  if (path.extension() == ".jsonl") return parse_report_jsonl(text.str());
  if (path.extension() == ".csv") return parse_report_csv(text.str());
  bad("unknown report extension " + path.extension().string());
}

RegimeReport without_wall_clock(RegimeReport report) {
  for (ReportRow& row : report.rows) row.wall_clock_s = 0.0;
  return report;
}

bool same_values(const RegimeReport& a, const RegimeReport& b) {
  return format_report_csv(a) == format_report_csv(b);
}

const ReportRow& last_evaluated(const RegimeReport& report) {
  for (auto it = report.rows.rbegin(); it != report.rows.rend(); ++it) {
    if (!it->subtask_success.empty()) return *it;
  }
  bad("report has no evaluated row");
}

Comparison compare(const std::vector<RegimeReport>& reports,
                   const std::vector<std::string>& labels) {
  if (reports.size() < 2) throw ConfigError("reports", "compare needs at least two reports");
  require(labels.size() == reports.size(), "compare: one label per report");
  const RegimeReport& base = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const RegimeReport& r = reports[i];
    std::vector<std::string> diff;
    if (r.task != base.task) diff.push_back("task");
    if (r.eval_seed != base.eval_seed) diff.push_back("eval_seed");
    if (r.eval_episodes != base.eval_episodes) diff.push_back("eval_episodes");
    if (r.eval_grid_hash != base.eval_grid_hash) diff.push_back("eval_grid");
    if (r.subtask_names != base.subtask_names) diff.push_back("subtasks");
    if (!diff.empty()) {
      std::string fields;
      for (const std::string& f : diff) fields += (fields.empty() ? "" : ", ") + f;
      throw ConfigError(diff.front(), "evaluation protocol mismatch between " +
                                          labels.front() + " and " + labels[i] +
                                          ": " + fields);
    }
  }
  Comparison out;
  out.task = base.task;
  out.subtask_names = base.subtask_names;
  const ReportRow& ref = last_evaluated(base);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const ReportRow& row = last_evaluated(reports[i]);
    ComparisonRow c;
    c.label = labels[i];
    c.regime = reports[i].regime;
    c.success = row.subtask_success;
    c.human_labeled_steps = reports[i].human_labeled_steps();
    for (std::size_t k = 0; k < c.success.size(); ++k) {
      c.success_delta.push_back(c.success[k] - ref.subtask_success[k]);
    }
    const double base_steps = static_cast<double>(base.human_labeled_steps());
    c.human_step_ratio = base_steps > 0
                             ? static_cast<double>(c.human_labeled_steps) / base_steps
                             : std::nan("");
    out.rows.push_back(std::move(c));
  }
  return out;
}

std::string format_comparison(const Comparison& c) {
  std::ostringstream o;
  o << "report,regime";
  for (const std::string& name : c.subtask_names) o << ",success_" << name;
  o << ",human_labeled_steps";
  for (const std::string& name : c.subtask_names) o << ",delta_" << name;
  o << ",human_step_ratio\n";
  char buf[32];
  for (const ComparisonRow& row : c.rows) {
    o << row.label << ',' << row.regime;
    for (double s : row.success) {
      std::snprintf(buf, sizeof buf, "%.4f", s);
      o << ',' << buf;
    }
    o << ',' << row.human_labeled_steps;
    for (double d : row.success_delta) {
      std::snprintf(buf, sizeof buf, "%+.4f", d);
      o << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.4f", row.human_step_ratio);
    o << ',' << buf << '\n';
  }
  return o.str();
}

}  // namespace gatelab::harness
