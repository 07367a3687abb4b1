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

#ifndef GATELAB_DAGGER_GATE_HPP_
#define GATELAB_DAGGER_GATE_HPP_

#include <string_view>

#include "gatelab/common.hpp"

namespace gatelab::dagger {

enum class GateDecision { kIntervene, kAutonomous };
enum class ExpertKind { kScripted, kHuman };

std::string_view to_string(ExpertKind kind);

struct GateConfig {
  double epsilon = 0.02;  // L2 action distance; infinity disables the gate
  double lambda = 1.0;    // weight of the expert in the executed action
  int min_hold = 5;       // steps an intervention lasts once triggered
  ExpertKind expert = ExpertKind::kScripted;

  void validate() const;
};

// INTERVENE iff ||a_policy - a_expert||_2 > epsilon. epsilon == 0 always
// intervenes, including when the two actions coincide.
GateDecision scripted_gate(const Vec& policy_action, const Vec& expert_action,
                           const GateConfig& gate);

// (1 - lambda) a_policy + lambda a_expert
Vec blended_action(const Vec& policy_action, const Vec& expert_action,
                   double lambda);

}  // namespace gatelab::dagger

#endif  // GATELAB_DAGGER_GATE_HPP_
