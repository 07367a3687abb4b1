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

#ifndef GATELAB_HARNESS_REPORT_HPP_
#define GATELAB_HARNESS_REPORT_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "gatelab/dagger/regime.hpp"

namespace gatelab::harness {

// Comma-separated table. The first line is a '#' header carrying the run
// identity; the wall_clock_s column is last so it can be cut away.
std::string format_report_csv(const dagger::RegimeReport& report);
dagger::RegimeReport parse_report_csv(const std::string& text);

// Line-delimited records: one header object, then one object per row.
std::string format_report_jsonl(const dagger::RegimeReport& report);
dagger::RegimeReport parse_report_jsonl(const std::string& text);

// Picks the parser from the extension (.csv or .jsonl).
dagger::RegimeReport load_report(const std::filesystem::path& path);

// Copy with every wall-clock field zeroed, for identity checks.
dagger::RegimeReport without_wall_clock(dagger::RegimeReport report);

bool same_values(const dagger::RegimeReport& a, const dagger::RegimeReport& b);

struct ComparisonRow {
  std::string label;
  std::string regime;
  std::vector<double> success;        // final evaluated row
  std::int64_t human_labeled_steps = 0;
  std::vector<double> success_delta;  // against the first report
  double human_step_ratio = 1.0;      // against the first report
};

struct Comparison {
  std::string task;
  std::vector<std::string> subtask_names;
  std::vector<ComparisonRow> rows;
};

// Throws ConfigError naming every differing protocol field when the reports
// disagree on task or evaluation protocol.
Comparison compare(const std::vector<dagger::RegimeReport>& reports,
                   const std::vector<std::string>& labels);
std::string format_comparison(const Comparison& comparison);

// Final row that carries evaluation results.
const dagger::ReportRow& last_evaluated(const dagger::RegimeReport& report);

}  // namespace gatelab::harness

#endif  // GATELAB_HARNESS_REPORT_HPP_
