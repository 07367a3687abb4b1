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

#ifndef GATELAB_POLICY_MLP_HPP_
#define GATELAB_POLICY_MLP_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "gatelab/common.hpp"
#include "gatelab/dagger/transition.hpp"

namespace gatelab::policy {

// Per-dimension affine normalization; std entries are floored at 1e-6.
struct NormStats {
  Vec mean;
  Vec std;

  static constexpr double kMinStd = 1e-6;

  static NormStats identity(int dim);
  // Columns of `samples` are observations.
  static NormStats fit(const Eigen::MatrixXd& samples);

  Vec normalize(const Vec& x) const;
  Vec denormalize(const Vec& z) const;
};

// Single-hidden-layer tanh regressor. Flat parameter layout:
//   W1 (hidden x obs, row-major) | b1 (hidden) | W2 (act x hidden, row-major) | b2 (act)
struct Policy {
  int obs_dim = 0;
  int act_dim = 0;
  int hidden_dim = 0;
  Vec weights;
  NormStats obs_norm;
  NormStats act_norm;

  static std::size_t parameter_count(int obs_dim, int act_dim, int hidden_dim) {
    return static_cast<std::size_t>((obs_dim + 1) * hidden_dim +
                                    (hidden_dim + 1) * act_dim);
  }
  // All-zero weights with identity normalization.
  static Policy zeros(int obs_dim, int act_dim, int hidden_dim);

  bool operator==(const Policy& other) const;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int grad_steps = 2000;
  std::uint64_t seed = 0;
  int hidden_dim = 64;

  void validate() const;
};

// Full-dataset loss before and after a training call.
struct TrainLog {
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

Vec predict(const Policy& policy, const Vec& obs);

struct LossGrad {
  double loss = 0.0;
  Vec gradient;
};

// Mean over the batch of the squared error between the normalized network
// output and the normalized target action.
LossGrad loss_and_grad(const Policy& policy, std::span<const Transition> batch);

// Same, on already-normalized column matrices.
LossGrad loss_and_grad(const Policy& policy, const Eigen::MatrixXd& obs,
                       const Eigen::MatrixXd& act);

double dataset_loss(const Policy& policy, std::span<const Transition> data);

// Behavior cloning with Adam. Without `init` the weights are drawn from the
// seeded initializer; normalization is always refit on `dataset`.
Policy train_bc(std::span<const Transition> dataset, const TrainConfig& config,
                const std::optional<Policy>& init = std::nullopt,
                TrainLog* log = nullptr);

// train_bc from `policy` with fresh optimizer moments.
Policy finetune(const Policy& policy, std::span<const Transition> dataset,
                const TrainConfig& config, TrainLog* log = nullptr);

// .pol serialization (little-endian, versioned header).
inline constexpr std::uint32_t kPolicyFormatVersion = 1;
void write_policy(std::ostream& out, const Policy& policy);
Policy read_policy(std::istream& in);
void save_policy(const std::string& path, const Policy& policy);
Policy load_policy(const std::string& path);

}  // namespace gatelab::policy

#endif  // GATELAB_POLICY_MLP_HPP_
