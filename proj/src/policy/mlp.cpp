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

#include "gatelab/policy/mlp.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "gatelab/rng.hpp"

namespace gatelab::policy {
namespace {

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

struct Offsets {
  Eigen::Index w1, b1, w2, b2, total;
};

Offsets offsets(const Policy& p) {
  Offsets o;
  o.w1 = 0;
  o.b1 = o.w1 + static_cast<Eigen::Index>(p.hidden_dim) * p.obs_dim;
  o.w2 = o.b1 + p.hidden_dim;
  o.b2 = o.w2 + static_cast<Eigen::Index>(p.act_dim) * p.hidden_dim;
  o.total = o.b2 + p.act_dim;
  return o;
}

void check_policy(const Policy& p) {
  require(p.obs_dim > 0 && p.act_dim > 0 && p.hidden_dim > 0,
          "policy: dimensions must be positive");
  require(static_cast<std::size_t>(p.weights.size()) ==
              Policy::parameter_count(p.obs_dim, p.act_dim, p.hidden_dim),
          "policy: parameter count mismatch");
  require(p.obs_norm.mean.size() == p.obs_dim &&
              p.obs_norm.std.size() == p.obs_dim &&
              p.act_norm.mean.size() == p.act_dim &&
              p.act_norm.std.size() == p.act_dim,
          "policy: normalization size mismatch");
}

// Normalized column matrices for a dataset.
void normalized_matrices(const Policy& p, std::span<const Transition> data,
                         Eigen::MatrixXd* obs, Eigen::MatrixXd* act) {
  const auto n = static_cast<Eigen::Index>(data.size());
  obs->resize(p.obs_dim, n);
  act->resize(p.act_dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = data[i];
    require(t.obs.size() == p.obs_dim && t.action.size() == p.act_dim,
            "policy: transition dimension mismatch");
    obs->col(i) = p.obs_norm.normalize(t.obs);
    act->col(i) = p.act_norm.normalize(t.action);
  }
}

void refit_norms(Policy* p, std::span<const Transition> data) {
  Eigen::MatrixXd obs(p->obs_dim, static_cast<Eigen::Index>(data.size()));
  Eigen::MatrixXd act(p->act_dim, static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    require(data[i].obs.size() == p->obs_dim &&
                data[i].action.size() == p->act_dim,
            "train: transition dimension mismatch");
    obs.col(static_cast<Eigen::Index>(i)) = data[i].obs;
    act.col(static_cast<Eigen::Index>(i)) = data[i].action;
  }
  p->obs_norm = NormStats::fit(obs);
  p->act_norm = NormStats::fit(act);
}

// Weights ~ U(-0.1, 0.1) * 10 / sqrt(fan_in), i.e. U(+-1/sqrt(fan_in)).
// Biases start at zero.
Vec initial_weights(const Policy& p, std::uint64_t seed) {
  CounterRng rng(seed, /*stream=*/0x1417);
  const Offsets o = offsets(p);
  Vec w = Vec::Zero(o.total);
  const double s1 = 10.0 / std::sqrt(static_cast<double>(p.obs_dim));
  const double s2 = 10.0 / std::sqrt(static_cast<double>(p.hidden_dim));
  for (Eigen::Index i = o.w1; i < o.b1; ++i) w[i] = rng.uniform(-0.1, 0.1) * s1;
  for (Eigen::Index i = o.w2; i < o.b2; ++i) w[i] = rng.uniform(-0.1, 0.1) * s2;
  return w;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  in.read(bytes.data(), bytes.size());
  if (!in) throw std::runtime_error("policy file truncated");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  return std::bit_cast<T>(bytes);
}

constexpr char kMagic[8] = {'G', 'L', 'P', 'O', 'L', 'I', 'C', 'Y'};

}  // namespace

NormStats NormStats::identity(int dim) {
  return {Vec::Zero(dim), Vec::Ones(dim)};
}

NormStats NormStats::fit(const Eigen::MatrixXd& samples) {
  require(samples.cols() > 0, "NormStats::fit: no samples");
  NormStats stats;
  stats.mean = samples.rowwise().mean();
  const Eigen::MatrixXd centered = samples.colwise() - stats.mean;
  stats.std = (centered.array().square().rowwise().sum() /
               static_cast<double>(samples.cols()))
                  .sqrt()
                  .max(kMinStd)
                  .matrix();
  return stats;
}

Vec NormStats::normalize(const Vec& x) const {
  return (x - mean).cwiseQuotient(std);
}

Vec NormStats::denormalize(const Vec& z) const {
  return z.cwiseProduct(std) + mean;
}

Policy Policy::zeros(int obs_dim, int act_dim, int hidden_dim) {
  Policy p;
  p.obs_dim = obs_dim;
  p.act_dim = act_dim;
  p.hidden_dim = hidden_dim;
  p.weights = Vec::Zero(static_cast<Eigen::Index>(
      parameter_count(obs_dim, act_dim, hidden_dim)));
  p.obs_norm = NormStats::identity(obs_dim);
  p.act_norm = NormStats::identity(act_dim);
  return p;
}

bool Policy::operator==(const Policy& other) const {
  auto same = [](const Vec& a, const Vec& b) {
    return a.size() == b.size() && (a.size() == 0 || a == b);
  };
  return obs_dim == other.obs_dim && act_dim == other.act_dim &&
         hidden_dim == other.hidden_dim && same(weights, other.weights) &&
         same(obs_norm.mean, other.obs_norm.mean) &&
         same(obs_norm.std, other.obs_norm.std) &&
         same(act_norm.mean, other.act_norm.mean) &&
         same(act_norm.std, other.act_norm.std);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) {
    throw ConfigError("train.learning_rate", "learning_rate must be positive");
  }
  if (batch_size <= 0) {
    throw ConfigError("train.batch_size", "batch_size must be positive");
  }
  if (grad_steps < 0) {
    throw ConfigError("train.grad_steps", "grad_steps must be non-negative");
  }
  if (hidden_dim <= 0) {
    throw ConfigError("train.hidden_dim", "hidden_dim must be positive");
  }
}

Vec predict(const Policy& policy, const Vec& obs) {
  check_policy(policy);
  require(obs.size() == policy.obs_dim, "predict: observation has " +
                                            std::to_string(obs.size()) +
                                            " entries, policy expects " +
                                            std::to_string(policy.obs_dim));
  require(obs.allFinite(), "predict: non-finite observation");
  const Offsets o = offsets(policy);
  const double* w = policy.weights.data();
  ConstMap w1(w + o.w1, policy.hidden_dim, policy.obs_dim);
  Eigen::Map<const Vec> b1(w + o.b1, policy.hidden_dim);
  ConstMap w2(w + o.w2, policy.act_dim, policy.hidden_dim);
  Eigen::Map<const Vec> b2(w + o.b2, policy.act_dim);
  const Vec hidden = (w1 * policy.obs_norm.normalize(obs) + b1).array().tanh();
  return policy.act_norm.denormalize(w2 * hidden + b2);
}

LossGrad loss_and_grad(const Policy& policy, const Eigen::MatrixXd& obs,
                       const Eigen::MatrixXd& act) {
  check_policy(policy);
  require(obs.cols() > 0, "loss_and_grad: empty batch");
  require(obs.cols() == act.cols() && obs.rows() == policy.obs_dim &&
              act.rows() == policy.act_dim,
          "loss_and_grad: batch dimension mismatch");
  const Offsets o = offsets(policy);
  const double* w = policy.weights.data();
  ConstMap w1(w + o.w1, policy.hidden_dim, policy.obs_dim);
  Eigen::Map<const Vec> b1(w + o.b1, policy.hidden_dim);
  ConstMap w2(w + o.w2, policy.act_dim, policy.hidden_dim);
  Eigen::Map<const Vec> b2(w + o.b2, policy.act_dim);

  const double n = static_cast<double>(obs.cols());
  const Eigen::MatrixXd hidden =
      ((w1 * obs).colwise() + b1).array().tanh().matrix();
  const Eigen::MatrixXd residual = ((w2 * hidden).colwise() + b2) - act;

  LossGrad out;
  out.loss = residual.squaredNorm() / n;
  out.gradient = Vec::Zero(o.total);
  double* g = out.gradient.data();

  const Eigen::MatrixXd d_out = (2.0 / n) * residual;
  MutMap(g + o.w2, policy.act_dim, policy.hidden_dim).noalias() =
      d_out * hidden.transpose();
  Eigen::Map<Vec>(g + o.b2, policy.act_dim) = d_out.rowwise().sum();
  const Eigen::MatrixXd d_pre =
      ((w2.transpose() * d_out).array() * (1.0 - hidden.array().square()))
          .matrix();
  MutMap(g + o.w1, policy.hidden_dim, policy.obs_dim).noalias() =
      d_pre * obs.transpose();
  Eigen::Map<Vec>(g + o.b1, policy.hidden_dim) = d_pre.rowwise().sum();
  return out;
}

LossGrad loss_and_grad(const Policy& policy, std::span<const Transition> batch) {
  require(!batch.empty(), "loss_and_grad: empty batch");
  check_policy(policy);
  Eigen::MatrixXd obs, act;
  normalized_matrices(policy, batch, &obs, &act);
  return loss_and_grad(policy, obs, act);
}

double dataset_loss(const Policy& policy, std::span<const Transition> data) {
  return loss_and_grad(policy, data).loss;
}

Policy train_bc(std::span<const Transition> dataset, const TrainConfig& config,
                const std::optional<Policy>& init, TrainLog* log) {
  if (dataset.empty()) throw std::invalid_argument("train_bc: empty dataset");
  config.validate();

  Policy policy;
  if (init) {
    policy = *init;
    check_policy(policy);
  } else {
    policy.obs_dim = static_cast<int>(dataset.front().obs.size());
    policy.act_dim = static_cast<int>(dataset.front().action.size());
    policy.hidden_dim = config.hidden_dim;
    policy.weights = initial_weights(policy, config.seed);
  }
  refit_norms(&policy, dataset);

  Eigen::MatrixXd obs, act;
  normalized_matrices(policy, dataset, &obs, &act);
  if (log) log->initial_loss = loss_and_grad(policy, obs, act).loss;

  const auto n = static_cast<Eigen::Index>(dataset.size());
  const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(config.seed, /*stream=*/0x5b1e);
  Eigen::Index cursor = n;  // forces a shuffle before the first batch

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  Vec m = Vec::Zero(policy.weights.size());
  Vec v = Vec::Zero(policy.weights.size());
  Eigen::MatrixXd batch_obs(policy.obs_dim, batch);
  Eigen::MatrixXd batch_act(policy.act_dim, batch);
  double beta1_t = 1.0, beta2_t = 1.0;

  for (int t = 0; t < config.grad_steps; ++t) {
    for (Eigen::Index b = 0; b < batch; ++b) {
      if (cursor == n) {
        shuffle(std::span(order), rng);
        cursor = 0;
      }
      const Eigen::Index idx = order[cursor++];
      batch_obs.col(b) = obs.col(idx);
      batch_act.col(b) = act.col(idx);
    }
    const LossGrad lg = loss_and_grad(policy, batch_obs, batch_act);
    beta1_t *= kBeta1;
    beta2_t *= kBeta2;
    m = kBeta1 * m + (1 - kBeta1) * lg.gradient;
    v = kBeta2 * v + (1 - kBeta2) * lg.gradient.cwiseAbs2();
    const double lr = config.learning_rate * std::sqrt(1 - beta2_t) / (1 - beta1_t);
    policy.weights.array() -=
        lr * m.array() / (v.array().sqrt() + kEps * std::sqrt(1 - beta2_t));
  }

  if (log) log->final_loss = loss_and_grad(policy, obs, act).loss;
  return policy;
}

Policy finetune(const Policy& policy, std::span<const Transition> dataset,
                const TrainConfig& config, TrainLog* log) {
  return train_bc(dataset, config, policy, log);
}

void write_policy(std::ostream& out, const Policy& policy) {
  check_policy(policy);
  out.write(kMagic, sizeof(kMagic));
  write_le<std::uint32_t>(out, kPolicyFormatVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(policy.obs_dim));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(policy.act_dim));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(policy.hidden_dim));
  for (const Vec* v : {&policy.obs_norm.mean, &policy.obs_norm.std,
                       &policy.act_norm.mean, &policy.act_norm.std}) {
    for (double x : *v) write_le<double>(out, x);
  }
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(policy.weights.size()));
  for (double x : policy.weights) write_le<double>(out, x);
}

Policy read_policy(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a policy file (bad magic)");
  }
  const auto version = read_le<std::uint32_t>(in);
  if (version != kPolicyFormatVersion) {
    throw std::runtime_error("unsupported policy format version " +
                             std::to_string(version));
  }
  Policy p;
  p.obs_dim = static_cast<int>(read_le<std::uint32_t>(in));
  p.act_dim = static_cast<int>(read_le<std::uint32_t>(in));
  p.hidden_dim = static_cast<int>(read_le<std::uint32_t>(in));
  auto read_vec = [&](int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = read_le<double>(in);
    return v;
  };
  p.obs_norm.mean = read_vec(p.obs_dim);
  p.obs_norm.std = read_vec(p.obs_dim);
  p.act_norm.mean = read_vec(p.act_dim);
  p.act_norm.std = read_vec(p.act_dim);
  const auto count = read_le<std::uint64_t>(in);
  if (count != Policy::parameter_count(p.obs_dim, p.act_dim, p.hidden_dim)) {
    throw std::runtime_error("policy file parameter count does not match dims");
  }
  p.weights = read_vec(static_cast<int>(count));
  return p;
}

void save_policy(const std::string& path, const Policy& policy) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_policy(out, policy);
  if (!out) throw std::runtime_error("failed writing " + path);
}

Policy load_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_policy(in);
}

}  // namespace gatelab::policy
