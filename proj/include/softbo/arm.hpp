// Copyright 2026 The softbo Authors
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
//
// Disk-chain model of the 3-continuum-joint arm. Each continuum joint is a
// run of thin disks linked by 2-DOF universal joints with a spring and damper
// in parallel per axis; antagonistic chamber pairs apply a net bending torque
// split across the joint's disks. By default the arm stands upright on the
// ground plane (base at z = base_height, extending along +z), which puts the
// hammer sensor within reach of the tip; a hanging mount is available for
// configurations that need a stable zero-q equilibrium.
//
// Dynamics are full articulated-chain dynamics over the point-mass bodies
// (disks, link midpoints, tip payload): mass matrix from Jacobians, velocity
// bias from a standard forward recursion, integrated by kick-drift-kick
// velocity Verlet with the joint damping handled implicitly in each kick.

#ifndef SOFTBO_ARM_HPP_
#define SOFTBO_ARM_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "softbo/errors.hpp"
#include "softbo/math.hpp"
#include "softbo/policy.hpp"

namespace softbo {

struct ContinuumJointParams {
  int disk_count = 4;
  double segment_length = 0.3;   // m
  double disk_mass = 0.5;        // kg
  double stiffness = 8.0;        // N m / rad per universal-joint axis
  double damping = 0.8;          // N m s / rad per universal-joint axis
  double torque_gain = 0.05;     // N m / kPa of differential pressure
};

struct RigidLinkParams {
  double length = 0.2;  // m
  double mass = 1.0;    // kg
};

struct ArmModel {
  std::array<ContinuumJointParams, 3> joints{};
  std::array<RigidLinkParams, 2> links{};
  double gravity = 9.81;        // m/s^2, downward
  double rho_max = 205.0;       // kPa
  bool hanging = false;         // mount: upright from the ground, or hanging
  double base_height = 0.0;     // m, mount point above the ground plane
  double joint_limit = kPi / 2; // rad, hard stop per universal-joint axis
  double tip_radius = 0.05;     // m, contact sphere at the end effector
  double contact_stiffness = 5000.0;  // N/m penalty contact
  bool tip_ground_contact = true;     // tip sphere collides with z = 0

  int dof() const {
    int n = 0;
    for (const auto& j : joints) n += 2 * j.disk_count;
    return n;
  }

  double total_length() const {
    double len = 0.0;
    for (const auto& j : joints) len += j.segment_length;
    for (const auto& l : links) len += l.length;
    return len;
  }

  void validate() const {
    // Stiffness and damping may be zeroed for conservative-dynamics checks.
    for (const auto& j : joints) {
      if (j.disk_count < 1 || !(j.segment_length > 0.0) || !(j.disk_mass > 0.0) ||
          !(j.stiffness >= 0.0) || !(j.damping >= 0.0) || !(j.torque_gain > 0.0)) {
        throw std::invalid_argument("ArmModel: joint parameters must be positive");
      }
    }
    for (const auto& l : links) {
      if (!(l.length > 0.0) || !(l.mass > 0.0)) {
        throw std::invalid_argument("ArmModel: link parameters must be positive");
      }
    }
    if (!(gravity >= 0.0) || !(rho_max > 0.0) || !(joint_limit > 0.0)) {
      throw std::invalid_argument("ArmModel: gravity/rho_max/joint_limit invalid");
    }
  }
};

struct AttachedObject {
  double mass = 0.0;
  bool released = false;
  bool landed = false;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

struct SimState {
  Eigen::VectorXd q;     // 2 angles per universal joint, base to tip
  Eigen::VectorXd qdot;  // rad/s
  double t = 0.0;
  std::optional<AttachedObject> object;

  static SimState rest(const ArmModel& model) {
    SimState s;
    s.q = Eigen::VectorXd::Zero(model.dof());
    s.qdot = Eigen::VectorXd::Zero(model.dof());
    return s;
  }
};

// Horizontal force-sensor disk lying in the plane z = center.z().
struct SensorDisk {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.25;
  double activation_force = 5.0;
};

struct TipState {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

class Simulator {
 public:
  explicit Simulator(const ArmModel& model) : model_(model) {
    model_.validate();
    build_layout();
    const int n = model_.dof();
    mass_matrix_.resize(n, n);
    rhs_.resize(n);
    damping_.resize(n);
    for (int i = 0; i < n; ++i) damping_[i] = dofs_[std::size_t(i)].damping;
    body_jac_.resize(3, n);
  }

  const ArmModel& model() const { return model_; }

  // Net actuation torque per DOF for a command (pressure differential split
  // across the joint's disks).
  Eigen::VectorXd actuation_torques(const PressureCommand& command) const {
    Eigen::VectorXd tau(model_.dof());
    for (std::size_t i = 0; i < dofs_.size(); ++i) {
      const auto& d = dofs_[i];
      tau[static_cast<Eigen::Index>(i)] =
          d.torque_coeff * (command[d.chamber_a] - command[d.chamber_b]);
    }
    return tau;
  }

  // One integrator substep: kick-drift-kick (velocity Verlet) with the joint
  // damping handled implicitly inside each half kick. The optional sensor
  // adds penalty contact at the tip; the sensed (thresholded) force is
  // written to *sensed_force.
  void step(SimState& state, const PressureCommand& command, double dt,
            const SensorDisk* sensor = nullptr,
            double* sensed_force = nullptr) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    check_finite(state);

    const double extra_tip_mass =
        (state.object && !state.object->released) ? state.object->mass : 0.0;
    const double half = 0.5 * dt;

    double raw_force = 0.0;
    half_kick(state, command, half, extra_tip_mass, sensor, raw_force);
    state.q += dt * state.qdot;
    apply_hard_stops(state);
    half_kick(state, command, half, extra_tip_mass, sensor, raw_force);

    if (sensed_force != nullptr) {
      *sensed_force =
          (sensor != nullptr && raw_force >= sensor->activation_force) ? raw_force
                                                                       : 0.0;
    }

    // Attached object rides the tip; a released one flies ballistically
    // (exact constant-gravity update) until it lands at z = 0.
    if (state.object) {
      auto& obj = *state.object;
      if (!obj.released) {
        const TipState tip = tip_state(state);
        obj.position = tip.position;
        obj.velocity = tip.velocity;
      } else if (!obj.landed) {
        advance_ballistic(obj, dt, model_.gravity);
      }
    }

    state.t += dt;
    check_finite(state);
  }

  TipState tip_state(const SimState& state) {
    walk_kinematics(state.q, state.qdot);
    return {tip_position_, tip_velocity_};
  }

  // Kinetic + gravitational + spring energy of the chain, plus the free-flight
  // energy of a released object.
  double mechanical_energy(const SimState& state) {
    const double extra_tip_mass =
        (state.object && !state.object->released) ? state.object->mass : 0.0;
    walk_full(state.q, state.qdot, extra_tip_mass);
    double energy = 0.0;
    const int n = model_.dof();
    mass_matrix_.setZero();
    for (const auto& b : bodies_) {
      fill_body_jacobian(b);
      auto jac = body_jac_.leftCols(b.watermark);
      mass_matrix_.topLeftCorner(b.watermark, b.watermark).noalias() +=
          b.mass * jac.transpose() * jac;
      energy += b.mass * model_.gravity * b.position.z();
    }
    energy += 0.5 * state.qdot.dot(mass_matrix_ * state.qdot);
    for (int i = 0; i < n; ++i) {
      energy += 0.5 * dofs_[std::size_t(i)].stiffness * state.q[i] * state.q[i];
    }
    if (state.object && state.object->released && !state.object->landed) {
      const auto& o = *state.object;
      energy += 0.5 * o.mass * o.velocity.squaredNorm() +
                o.mass * model_.gravity * o.position.z();
    }
    return energy;
  }

  static void advance_ballistic(AttachedObject& obj, double dt, double gravity) {
    const Eigen::Vector3d acc(0.0, 0.0, -gravity);
    Eigen::Vector3d new_pos = obj.position + dt * obj.velocity + 0.5 * dt * dt * acc;
    Eigen::Vector3d new_vel = obj.velocity + dt * acc;
    if (new_pos.z() <= 0.0 && obj.position.z() > 0.0) {
      // Exact crossing time of z(t) = p + v t - g t^2 / 2.
      const double pz = obj.position.z();
      const double vz = obj.velocity.z();
      const double disc = vz * vz + 2.0 * gravity * pz;
      const double t_land =
          gravity > 0.0 ? (vz + std::sqrt(std::max(0.0, disc))) / gravity : dt;
      obj.position.x() += obj.velocity.x() * t_land;
      obj.position.y() += obj.velocity.y() * t_land;
      obj.position.z() = 0.0;
      obj.velocity.setZero();
      obj.landed = true;
      return;
    }
    obj.position = new_pos;
    obj.velocity = new_vel;
  }

 private:
  // Velocity update over a half step: (M + h C) v' = M v + h rhs, with rhs
  // the actuation, spring, gravity, bias and contact terms at the current
  // state. Accumulates the largest raw contact force seen.
  void half_kick(SimState& state, const PressureCommand& command, double h,
                 double extra_tip_mass, const SensorDisk* sensor,
                 double& raw_force) {
    const int n = model_.dof();
    const Eigen::Vector3d g_vec(0.0, 0.0, -model_.gravity);

    walk_full(state.q, state.qdot, extra_tip_mass);
    mass_matrix_.setZero();
    rhs_.setZero();
    for (const auto& b : bodies_) {
      fill_body_jacobian(b);
      auto jac = body_jac_.leftCols(b.watermark);
      mass_matrix_.topLeftCorner(b.watermark, b.watermark).noalias() +=
          b.mass * jac.transpose() * jac;
      rhs_.head(b.watermark).noalias() +=
          b.mass * (jac.transpose() * (g_vec - b.bias_acc));
    }
    for (int i = 0; i < n; ++i) {
      const auto& d = dofs_[std::size_t(i)];
      rhs_[i] += d.torque_coeff * (command[d.chamber_a] - command[d.chamber_b]) -
                 d.stiffness * state.q[i];
    }
    // Tip-sphere contact: the sensor disk where it applies (force recorded),
    // otherwise the bare ground plane.
    {
      const Eigen::Vector3d tip = tip_position_;
      bool on_sensor = false;
      if (sensor != nullptr) {
        const double pen = sensor->center.z() + model_.tip_radius - tip.z();
        const double horiz = std::hypot(tip.x() - sensor->center.x(),
                                        tip.y() - sensor->center.y());
        if (pen > 0.0 && horiz <= sensor->radius) {
          on_sensor = true;
          const double f = model_.contact_stiffness * pen;
          raw_force = std::max(raw_force, f);
          apply_tip_force(Eigen::Vector3d(0.0, 0.0, f));
        }
      }
      if (!on_sensor && model_.tip_ground_contact) {
        const double pen = model_.tip_radius - tip.z();
        if (pen > 0.0) {
          apply_tip_force(
              Eigen::Vector3d(0.0, 0.0, model_.contact_stiffness * pen));
        }
      }
    }

    Eigen::MatrixXd lhs = mass_matrix_;
    lhs.diagonal() += h * damping_;
    Eigen::VectorXd mv = mass_matrix_ * state.qdot + h * rhs_;
    ldlt_.compute(lhs);
    if (ldlt_.info() != Eigen::Success) {
      throw SimulationDiverged("mass matrix factorization failed at t=" +
                               std::to_string(state.t));
    }
    state.qdot = ldlt_.solve(mv);
  }

  void apply_tip_force(const Eigen::Vector3d& force) {
    fill_body_jacobian(tip_body_);
    rhs_.head(tip_body_.watermark).noalias() +=
        body_jac_.leftCols(tip_body_.watermark).transpose() * force;
  }

  void apply_hard_stops(SimState& state) const {
    for (int i = 0; i < model_.dof(); ++i) {
      if (state.q[i] > model_.joint_limit) {
        state.q[i] = model_.joint_limit;
        state.qdot[i] = 0.0;
      } else if (state.q[i] < -model_.joint_limit) {
        state.q[i] = -model_.joint_limit;
        state.qdot[i] = 0.0;
      }
    }
  }

  struct DofInfo {
    Eigen::Vector3d axis_local;
    double stiffness, damping, torque_coeff;
    int chamber_a, chamber_b;
  };
  struct Item {
    enum Kind { kDof, kTranslate, kMass } kind;
    int dof_index = -1;
    double length = 0.0;
    double mass = 0.0;
  };
  struct Body {
    double mass = 0.0;
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
    Eigen::Vector3d bias_acc = Eigen::Vector3d::Zero();
    int watermark = 0;  // number of inboard DOFs
  };

  void build_layout() {
    int dof_index = 0;
    for (int j = 0; j < 3; ++j) {
      const auto& joint = model_.joints[std::size_t(j)];
      const double spacing = joint.segment_length / joint.disk_count;
      for (int disk = 0; disk < joint.disk_count; ++disk) {
        for (int axis = 0; axis < 2; ++axis) {
          DofInfo info;
          info.axis_local = axis == 0 ? Eigen::Vector3d::UnitX()
                                      : Eigen::Vector3d::UnitY();
          info.stiffness = joint.stiffness;
          info.damping = joint.damping;
          info.torque_coeff = joint.torque_gain / joint.disk_count;
          info.chamber_a = 4 * j + 2 * axis;
          info.chamber_b = 4 * j + 2 * axis + 1;
          dofs_.push_back(info);
          items_.push_back({Item::kDof, dof_index++, 0.0, 0.0});
        }
        items_.push_back({Item::kTranslate, -1, spacing, 0.0});
        items_.push_back({Item::kMass, -1, 0.0, joint.disk_mass});
      }
      if (j < 2) {
        const auto& link = model_.links[std::size_t(j)];
        items_.push_back({Item::kTranslate, -1, link.length / 2.0, 0.0});
        items_.push_back({Item::kMass, -1, 0.0, link.mass});
        items_.push_back({Item::kTranslate, -1, link.length / 2.0, 0.0});
      }
    }
  }

  void check_finite(const SimState& state) const {
    if (!state.q.allFinite() || !state.qdot.allFinite() ||
        state.qdot.cwiseAbs().maxCoeff() > 1e6) {
      throw SimulationDiverged("simulation diverged at t=" +
                               std::to_string(state.t));
    }
  }

  // Forward pass. Fills dof origins/axes, body table (with velocities and
  // zero-acceleration bias), and the tip state.
  void walk_full(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                 double extra_tip_mass) {
    dof_origin_.resize(dofs_.size());
    dof_axis_.resize(dofs_.size());
    bodies_.clear();

    const double dir = model_.hanging ? -1.0 : 1.0;
    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
    Eigen::Vector3d pos(0.0, 0.0, model_.base_height);
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();
    Eigen::Vector3d vel = Eigen::Vector3d::Zero();
    Eigen::Vector3d alpha = Eigen::Vector3d::Zero();
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    int ndofs = 0;

    for (const auto& item : items_) {
      switch (item.kind) {
        case Item::kDof: {
          const auto& d = dofs_[std::size_t(item.dof_index)];
          const Eigen::Vector3d w = rot * d.axis_local;
          dof_origin_[std::size_t(item.dof_index)] = pos;
          dof_axis_[std::size_t(item.dof_index)] = w;
          alpha += omega.cross(w) * qdot[item.dof_index];
          omega += w * qdot[item.dof_index];
          rot = rot * Eigen::AngleAxisd(q[item.dof_index], d.axis_local)
                          .toRotationMatrix();
          ++ndofs;
          break;
        }
        case Item::kTranslate: {
          const Eigen::Vector3d r =
              rot * Eigen::Vector3d(0.0, 0.0, dir * item.length);
          pos += r;
          vel += omega.cross(r);
          acc += alpha.cross(r) + omega.cross(omega.cross(r));
          break;
        }
        case Item::kMass:
          bodies_.push_back({item.mass, pos, vel, acc, ndofs});
          break;
      }
    }
    tip_position_ = pos;
    tip_velocity_ = vel;
    tip_body_ = {extra_tip_mass, pos, vel, acc, ndofs};
    if (extra_tip_mass > 0.0) bodies_.push_back(tip_body_);
  }

  // Positions and velocities only (for recording).
  void walk_kinematics(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot) {
    const double dir = model_.hanging ? -1.0 : 1.0;
    Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
    Eigen::Vector3d pos(0.0, 0.0, model_.base_height);
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();
    Eigen::Vector3d vel = Eigen::Vector3d::Zero();
    for (const auto& item : items_) {
      switch (item.kind) {
        case Item::kDof: {
          const auto& d = dofs_[std::size_t(item.dof_index)];
          const Eigen::Vector3d w = rot * d.axis_local;
          omega += w * qdot[item.dof_index];
          rot = rot * Eigen::AngleAxisd(q[item.dof_index], d.axis_local)
                          .toRotationMatrix();
          break;
        }
        case Item::kTranslate: {
          const Eigen::Vector3d r =
              rot * Eigen::Vector3d(0.0, 0.0, dir * item.length);
          pos += r;
          vel += omega.cross(r);
          break;
        }
        case Item::kMass:
          break;
      }
    }
    tip_position_ = pos;
    tip_velocity_ = vel;
  }

  void fill_body_jacobian(const Body& b) {
    for (int i = 0; i < b.watermark; ++i) {
      body_jac_.col(i) = dof_axis_[std::size_t(i)].cross(
          b.position - dof_origin_[std::size_t(i)]);
    }
  }

  ArmModel model_;
  std::vector<DofInfo> dofs_;
  std::vector<Item> items_;

  // per-walk scratch
  std::vector<Eigen::Vector3d> dof_origin_, dof_axis_;
  std::vector<Body> bodies_;
  Body tip_body_;
  Eigen::Vector3d tip_position_ = Eigen::Vector3d::Zero();
  Eigen::Vector3d tip_velocity_ = Eigen::Vector3d::Zero();
  Eigen::MatrixXd mass_matrix_;
  Eigen::MatrixXd body_jac_;
  Eigen::VectorXd rhs_, damping_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
};

// Single-step convenience wrapper over a fresh Simulator.
inline SimState step(const ArmModel& model, SimState state,
                     const PressureCommand& command, double dt) {
  Simulator sim(model);
  sim.step(state, command, dt);
  return state;
}

}  // namespace softbo

#endif  // SOFTBO_ARM_HPP_
