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

#include "gatelab/dagger/gate.hpp"

#include <cmath>

namespace gatelab::dagger {

std::string_view to_string(ExpertKind kind) {
  return kind == ExpertKind::kScripted ? "scripted" : "human";
}

void GateConfig::validate() const {
  if (!(epsilon >= 0)) throw ConfigError("gate.epsilon", "epsilon must be >= 0");
  if (!(lambda >= 0 && lambda <= 1)) {
    throw ConfigError("gate.lambda", "lambda must lie in [0, 1]");
  }
  if (min_hold < 1) throw ConfigError("gate.min_hold", "min_hold must be >= 1");
}

GateDecision scripted_gate(const Vec& policy_action, const Vec& expert_action,
                           const GateConfig& gate) {
  require(policy_action.size() == expert_action.size(),
          "scripted_gate: dimension mismatch");
  if (gate.epsilon <= 0.0) return GateDecision::kIntervene;
  const double distance = (policy_action - expert_action).norm();
  return distance > gate.epsilon ? GateDecision::kIntervene
                                 : GateDecision::kAutonomous;
}

Vec blended_action(const Vec& policy_action, const Vec& expert_action,
                   double lambda) {
  require(policy_action.size() == expert_action.size(),
          "blended_action: dimension mismatch");
  require(lambda >= 0.0 && lambda <= 1.0, "blended_action: lambda outside [0, 1]");
  if (lambda == 1.0) return expert_action;
  if (lambda == 0.0) return policy_action;
  return (1.0 - lambda) * policy_action + lambda * expert_action;
}

}  // namespace gatelab::dagger
