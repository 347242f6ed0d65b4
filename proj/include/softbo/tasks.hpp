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
// Episodic tasks on the arm: throwing, hammering, and maximum tip speed.
// A rollout holds each command for duration/H seconds, substeps the dynamics,
// and records tip kinematics at every command boundary plus a dense trace.

#ifndef SOFTBO_TASKS_HPP_
#define SOFTBO_TASKS_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "softbo/arm.hpp"
#include "softbo/io.hpp"
#include "softbo/policy.hpp"

namespace softbo {

enum class TaskKind { kThrow, kHammer, kTipSpeed };

inline const char* task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::kThrow: return "throw";
    case TaskKind::kHammer: return "hammer";
    case TaskKind::kTipSpeed: return "tipspeed";
  }
  return "?";
}

struct TaskSpec {
  TaskKind kind = TaskKind::kThrow;
  int horizon = 10;
  double duration = 5.0;  // s
  int discretization = 2; // P
  double dt = 0.005;      // s, integrator substep

  double object_mass = 0.25;  // kg: 0.25 thrown cube, 2.0 hammer
  Eigen::Vector3d goal_position{-0.5, 0.5, 0.0};
  double sensor_radius = 0.25;
  double activation_force = 5.0;
  double flight_timeout = 10.0;  // s, thrown-object landing cutoff

  std::optional<double> step_limit_kpa;      // e.g. 30 for the tip-speed task
  std::optional<PressureCommand> nominal;    // step-clamp starting point
  // Start each trial from the arm's settled pose under the nominal command
  // (hardware holds its nominal pressures before a trial begins).
  bool settle_to_nominal = false;

  // Objective-reading switches (defaults follow the adopted readings).
  bool literal_throw_indicator = false;  // count D_cube only when t_R = H
  double hammer_momentum_sign = 1.0;     // upward momentum counted positive

  int first_penalty_step() const {
    return static_cast<int>(std::ceil(0.7 * horizon));
  }
  int param_dims() const { return horizon + (kind == TaskKind::kThrow ? 1 : 0); }

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("TaskSpec: horizon must be >= 1");
    if (!(duration > 0.0)) throw std::invalid_argument("TaskSpec: duration must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("TaskSpec: dt must be > 0");
    if (discretization < 2) throw std::invalid_argument("TaskSpec: discretization must be >= 2");
  }

  static TaskSpec throw_task() {
    TaskSpec t;
    t.kind = TaskKind::kThrow;
    t.object_mass = 0.25;
    return t;
  }
  static TaskSpec hammer_task() {
    TaskSpec t;
    t.kind = TaskKind::kHammer;
    t.object_mass = 2.0;
    return t;
  }
  static TaskSpec tip_speed_task() {
    TaskSpec t;
    t.kind = TaskKind::kTipSpeed;
    t.object_mass = 0.0;
    t.step_limit_kpa = 30.0;
    return t;
  }
};

struct TrajectoryStep {
  Eigen::Vector3d tip_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d tip_velocity = Eigen::Vector3d::Zero();
  PressureCommand command;
  double contact_force = 0.0;  // max sensed force over the step's substeps
  std::optional<Eigen::Vector3d> object_position;
  bool object_released = false;
};

struct DenseSample {
  double t = 0.0;
  Eigen::Vector3d tip_position = Eigen::Vector3d::Zero();
  Eigen::Vector3d tip_velocity = Eigen::Vector3d::Zero();
  double contact_force = 0.0;
  Eigen::Vector3d object_position = Eigen::Vector3d::Zero();
  bool has_object = false;
  bool released = false;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;  // exactly H
  std::vector<DenseSample> dense;     // one per substep
  std::optional<int> release_step;
  std::optional<Eigen::Vector3d> landing_position;
  bool landed_by_timeout = false;
  double dt = 0.0;
};

// Damped settling under a constant command; used for nominal-pose starts.
inline SimState settle(Simulator& sim, const PressureCommand& command,
                       double dt, double max_time = 60.0) {
  SimState state = SimState::rest(sim.model());
  const int steps = static_cast<int>(max_time / dt);
  for (int k = 0; k < steps; ++k) {
    sim.step(state, command, dt);
    if (state.qdot.cwiseAbs().maxCoeff() < 1e-7) break;
  }
  state.qdot.setZero();
  state.t = 0.0;
  return state;
}

inline Trajectory rollout(const ArmModel& model, const TaskSpec& task,
                          const std::vector<PressureCommand>& commands,
                          std::optional<int> release_step = std::nullopt,
                          const SimState* initial_state = nullptr) {
  task.validate();
  if (static_cast<int>(commands.size()) != task.horizon) {
    throw std::invalid_argument("rollout: need exactly H commands");
  }
  int t_release = 0;
  if (task.kind == TaskKind::kThrow) {
    t_release = release_step.value_or(task.horizon);
    if (t_release < 1 || t_release > task.horizon) {
      throw std::invalid_argument("rollout: release step must lie in {1..H}");
    }
  }

  Simulator sim(model);
  SimState state;
  if (initial_state != nullptr) {
    state = *initial_state;
    state.t = 0.0;
  } else if (task.settle_to_nominal && task.nominal) {
    state = settle(sim, *task.nominal, task.dt);
  } else {
    state = SimState::rest(model);
  }
  if (task.kind == TaskKind::kThrow || task.kind == TaskKind::kHammer) {
    AttachedObject obj;
    obj.mass = task.object_mass;
    const TipState tip = sim.tip_state(state);
    obj.position = tip.position;
    obj.velocity = tip.velocity;
    state.object = obj;
  }

  SensorDisk sensor;
  const bool with_sensor = task.kind == TaskKind::kHammer;
  if (with_sensor) {
    sensor.center = task.goal_position;
    sensor.radius = task.sensor_radius;
    sensor.activation_force = task.activation_force;
  }

  const double step_duration = task.duration / task.horizon;
  const int substeps = std::max(1, static_cast<int>(std::lround(step_duration / task.dt)));
  const double dt = step_duration / substeps;

  Trajectory traj;
  traj.dt = dt;
  traj.steps.reserve(static_cast<std::size_t>(task.horizon));
  traj.dense.reserve(static_cast<std::size_t>(task.horizon * substeps));
  if (task.kind == TaskKind::kThrow) traj.release_step = t_release;

  for (int t_step = 1; t_step <= task.horizon; ++t_step) {
    const PressureCommand& cmd = commands[std::size_t(t_step - 1)];
    double max_force = 0.0;
    for (int k = 0; k < substeps; ++k) {
      double sensed = 0.0;
      sim.step(state, cmd, dt, with_sensor ? &sensor : nullptr, &sensed);
      max_force = std::max(max_force, sensed);

      DenseSample sample;
      sample.t = state.t;
      const TipState tip = sim.tip_state(state);
      sample.tip_position = tip.position;
      sample.tip_velocity = tip.velocity;
      sample.contact_force = sensed;
      if (state.object) {
        sample.has_object = true;
        sample.object_position = state.object->position;
        sample.released = state.object->released;
      }
      traj.dense.push_back(sample);
    }

    TrajectoryStep rec;
    const TipState tip = sim.tip_state(state);
    rec.tip_position = tip.position;
    rec.tip_velocity = tip.velocity;
    rec.command = cmd;
    rec.contact_force = max_force;
    if (state.object) {
      rec.object_position = state.object->position;
      rec.object_released = state.object->released;
    }
    traj.steps.push_back(rec);

    if (task.kind == TaskKind::kThrow && t_step == t_release &&
        state.object && !state.object->released) {
      state.object->released = true;
      state.object->position = tip.position;
      state.object->velocity = tip.velocity;
    }
  }

  // Finish the throw flight analytically after the horizon.
  if (task.kind == TaskKind::kThrow && state.object) {
    auto& obj = *state.object;
    if (!obj.landed) {
      const double pz = obj.position.z();
      const double vz = obj.velocity.z();
      const double g = model.gravity;
      double t_land = task.flight_timeout;
      if (g > 0.0) {
        const double disc = vz * vz + 2.0 * g * std::max(0.0, pz);
        t_land = (vz + std::sqrt(disc)) / g;
      }
      if (t_land <= task.flight_timeout) {
        obj.position.x() += obj.velocity.x() * t_land;
        obj.position.y() += obj.velocity.y() * t_land;
        obj.position.z() = 0.0;
        obj.landed = true;
      } else {
        const double tt = task.flight_timeout;
        obj.position += obj.velocity * tt;
        obj.position.z() = pz + vz * tt - 0.5 * g * tt * tt;
        traj.landed_by_timeout = true;
      }
    }
    traj.landing_position = obj.position;
  }
  return traj;
}

// Throw return: sum of tip speeds through the release step plus the landed
// object's horizontal displacement from the base. The literal reading gates
// the displacement term on t_R = H.
inline double throw_objective(const Trajectory& traj, int release_step,
                              bool literal_indicator = false) {
  if (traj.steps.empty() || !traj.landing_position) {
    throw std::invalid_argument("throw_objective: need a throw trajectory with release data");
  }
  if (release_step < 1 || release_step > static_cast<int>(traj.steps.size())) {
    throw std::invalid_argument("throw_objective: release step out of range");
  }
  double speed_sum = 0.0;
  for (int t = 1; t <= release_step; ++t) {
    speed_sum += traj.steps[std::size_t(t - 1)].tip_velocity.norm();
  }
  const double d_cube = std::hypot(traj.landing_position->x(), traj.landing_position->y());
  if (literal_indicator && release_step != static_cast<int>(traj.steps.size())) {
    return speed_sum;
  }
  return speed_sum + d_cube;
}

// Hammer return: per-step vertical momentum plus sensed force, minus the
// tip-to-goal distance from the first penalty step onward.
inline double hammer_objective(const Trajectory& traj, const TaskSpec& task) {
  const int t0 = task.first_penalty_step();
  double value = 0.0;
  for (int t = 1; t <= static_cast<int>(traj.steps.size()); ++t) {
    const auto& rec = traj.steps[std::size_t(t - 1)];
    value += task.hammer_momentum_sign * task.object_mass * rec.tip_velocity.z();
    value += rec.contact_force;
    if (t >= t0) {
      value -= (rec.tip_position - task.goal_position).norm();
    }
  }
  return value;
}

// Maximum tip-speed magnitude over the dense substep trace.
inline double tip_speed_objective(const Trajectory& traj) {
  double best = 0.0;
  for (const auto& s : traj.dense) {
    best = std::max(best, s.tip_velocity.norm());
  }
  return best;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,tip_x,tip_y,tip_z,tip_vx,tip_vy,tip_vz,speed,F,obj_x,obj_y,obj_z,released\n";
  for (const auto& s : traj.dense) {
    os << fmt_full(s.t) << "," << fmt_full(s.tip_position.x()) << ","
       << fmt_full(s.tip_position.y()) << "," << fmt_full(s.tip_position.z())
       << "," << fmt_full(s.tip_velocity.x()) << ","
       << fmt_full(s.tip_velocity.y()) << "," << fmt_full(s.tip_velocity.z())
       << "," << fmt_full(s.tip_velocity.norm()) << ","
       << fmt_full(s.contact_force);
    if (s.has_object) {
      os << "," << fmt_full(s.object_position.x()) << ","
         << fmt_full(s.object_position.y()) << ","
         << fmt_full(s.object_position.z()) << "," << (s.released ? 1 : 0);
    } else {
      os << ",,,,0";
    }
    os << "\n";
  }
}

}  // namespace softbo

#endif  // SOFTBO_TASKS_HPP_
