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

#include <stdexcept>
#include <string>

#include "gatelab/dagger/transition.hpp"

namespace gatelab {

std::string_view to_string(Source source) {
  return source == Source::kHuman ? "HUMAN" : "POLICY";
}

Source parse_source(std::string_view name) {
  if (name == "HUMAN") return Source::kHuman;
  if (name == "POLICY") return Source::kPolicy;
  throw std::invalid_argument("unknown source '" + std::string(name) + "'");
}

}  // namespace gatelab
