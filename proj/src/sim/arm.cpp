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

#include "gatelab/sim/arm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gatelab::sim {
namespace {

void check_dim(const ArmModel& arm, Eigen::Index n, const char* what) {
  require(n == arm.dof(), std::string(what) + ": expected " +
                              std::to_string(arm.dof()) + " joints, got " +
                              std::to_string(n));
}

}  // namespace

void ArmModel::validate() const {
  const std::size_t n = link_lengths.size();
  require(n > 0, "arm: no links");
  require(link_masses.size() == n && com_offsets.size() == n &&
              joint_limits.size() == n,
          "arm: per-link sequences differ in length");
  require(inertia.size() == static_cast<Eigen::Index>(n) &&
              damping.size() == static_cast<Eigen::Index>(n),
          "arm: inertia/damping size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    require(link_lengths[i] > 0 && link_masses[i] > 0,
            "arm: link lengths and masses must be positive");
    require(com_offsets[i] >= 0 && com_offsets[i] <= link_lengths[i],
            "arm: com offset outside link");
    require(joint_limits[i].min < joint_limits[i].max,
            "arm: joint limit min >= max");
    require(inertia[i] > 0, "arm: inertia must be positive");
    require(damping[i] >= 0, "arm: damping must be non-negative");
  }
  require(gravity >= 0, "arm: gravity must be non-negative");
}

ArmModel ArmModel::two_link() {
  ArmModel arm;
  arm.link_lengths = {1.0, 1.0};
  arm.link_masses = {1.0, 1.0};
  arm.com_offsets = {0.5, 0.5};
  arm.joint_limits = {{-std::numbers::pi, std::numbers::pi}, {-2.9, 2.9}};
  arm.gravity = 9.81;
  arm.inertia = extended_inertia(arm);
  arm.damping = Vec(2);
  arm.damping << 0.5, 0.1;
  return arm;
}

Vec extended_inertia(const ArmModel& arm) {
  const int n = arm.dof();
  Vec inertia = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    double reach = 0.0;  // distance from joint i to the proximal end of link j
    for (int j = i; j < n; ++j) {
      const double m = arm.link_masses[j];
      const double l = arm.link_lengths[j];
      const double d = reach + arm.com_offsets[j];
      inertia[i] += m * d * d + m * l * l / 12.0;
      reach += l;
    }
  }
  return inertia;
}

Vec2 forward_kinematics(const ArmModel& arm, const Vec& positions) {
  check_dim(arm, positions.size(), "forward_kinematics");
  Vec2 p = Vec2::Zero();
  double phi = 0.0;
  for (int i = 0; i < arm.dof(); ++i) {
    phi += positions[i];
    p += arm.link_lengths[i] * Vec2(std::cos(phi), std::sin(phi));
  }
  return p;
}

Vec2 forward_kinematics(const ArmModel& arm, const JointState& q) {
  return forward_kinematics(arm, q.positions);
}

Vec gravity_torque(const ArmModel& arm, const Vec& positions) {
  check_dim(arm, positions.size(), "gravity_torque");
  const int n = arm.dof();
  // horizontal coordinates of joints and COMs
  std::vector<double> joint_x(n), com_x(n);
  double x = 0.0, phi = 0.0;
  for (int i = 0; i < n; ++i) {
    phi += positions[i];
    joint_x[i] = x;
    com_x[i] = x + arm.com_offsets[i] * std::cos(phi);
    x += arm.link_lengths[i] * std::cos(phi);
  }
  Vec tau = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      tau[i] += arm.link_masses[j] * (com_x[j] - joint_x[i]);
    }
    tau[i] *= arm.gravity;
  }
  return tau;
}

Vec gravity_torque(const ArmModel& arm, const JointState& q) {
  require(q.velocities.size() == q.positions.size(),
          "gravity_torque: position/velocity size mismatch");
  return gravity_torque(arm, q.positions);
}

Eigen::MatrixXd gravity_torque_jacobian(const ArmModel& arm,
                                        const Vec& positions) {
  check_dim(arm, positions.size(), "gravity_torque_jacobian");
  const int n = arm.dof();
  std::vector<double> phi(n), sin_phi(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += positions[i];
    phi[i] = acc;
    sin_phi[i] = std::sin(acc);
  }
  // d(com_x[j] - joint_x[i]) / d theta_k: only links i..j contribute and
  // each depends on theta_k for k <= its index.
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double m = arm.link_masses[j];
      for (int k = 0; k < n; ++k) {
        double d = 0.0;
        for (int link = std::max(i, k); link < j; ++link) {
          d -= arm.link_lengths[link] * sin_phi[link];
        }
        if (k <= j) d -= arm.com_offsets[j] * sin_phi[j];
        jac(i, k) += m * d;
      }
    }
  }
  return arm.gravity * jac;
}

double potential_energy(const ArmModel& arm, const Vec& positions) {
  check_dim(arm, positions.size(), "potential_energy");
  double y = 0.0, phi = 0.0, energy = 0.0;
  for (int i = 0; i < arm.dof(); ++i) {
    phi += positions[i];
    energy += arm.link_masses[i] * (y + arm.com_offsets[i] * std::sin(phi));
    y += arm.link_lengths[i] * std::sin(phi);
  }
  return arm.gravity * energy;
}

double kinetic_energy(const ArmModel& arm, const Vec& velocities) {
  check_dim(arm, velocities.size(), "kinetic_energy");
  return 0.5 * velocities.cwiseProduct(velocities).dot(arm.inertia);
}

Vec inverse_kinematics(const ArmModel& arm, const Vec2& target) {
  require(arm.dof() == 2, "inverse_kinematics: two-link arms only");
  const double l1 = arm.link_lengths[0];
  const double l2 = arm.link_lengths[1];
  const double r_min = std::abs(l1 - l2) + 1e-6;
  const double r_max = l1 + l2 - 1e-6;
  Vec2 p = target;
  double r = p.norm();
  if (r < 1e-9) p = Vec2(r_min, 0.0), r = r_min;
  if (r < r_min || r > r_max) {
    p *= std::clamp(r, r_min, r_max) / r;
    r = p.norm();
  }
  const double c2 =
      std::clamp((r * r - l1 * l1 - l2 * l2) / (2 * l1 * l2), -1.0, 1.0);
  const double theta2 = std::acos(c2);
  const double theta1 = std::atan2(p.y(), p.x()) -
                        std::atan2(l2 * std::sin(theta2), l1 + l2 * c2);
  Vec q(2);
  q << std::remainder(theta1, 2 * std::numbers::pi), theta2;
  return q;
}

Vec clamp_to_limits(const ArmModel& arm, const Vec& positions) {
  check_dim(arm, positions.size(), "clamp_to_limits");
  Vec out = positions;
  for (int i = 0; i < arm.dof(); ++i) {
    out[i] = std::clamp(out[i], arm.joint_limits[i].min, arm.joint_limits[i].max);
  }
  return out;
}

JointState integrate(const ArmModel& arm, const JointState& state,
                     const Vec& tau, double dt) {
  require(tau.size() == arm.dof(), "integrate: torque dimension mismatch");
  JointState next = state;
  const Vec accel = (tau - gravity_torque(arm, next.positions) -
                     arm.damping.cwiseProduct(next.velocities))
                        .cwiseQuotient(arm.inertia);
  next.velocities += dt * accel;
  next.positions += dt * next.velocities;
  for (int j = 0; j < arm.dof(); ++j) {
    const JointLimit& lim = arm.joint_limits[j];
    if (next.positions[j] < lim.min || next.positions[j] > lim.max) {
      next.positions[j] = std::clamp(next.positions[j], lim.min, lim.max);
      next.velocities[j] = 0.0;
    }
  }
  return next;
}

}  // namespace gatelab::sim
