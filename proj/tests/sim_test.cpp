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

#include "softbo/arm.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "softbo/policy.hpp"
#include "softbo/tasks.hpp"

namespace softbo {
namespace {

ArmModel conservative_hanging_model() {
  ArmModel m;
  m.hanging = true;
  m.base_height = 1.5;
  for (auto& j : m.joints) {
    j.stiffness = 0.0;
    j.damping = 0.0;
  }
  return m;
}

SimState bent_state(const ArmModel& m, double amplitude) {
  SimState s = SimState::rest(m);
  for (int i = 0; i < s.q.size(); ++i) {
    s.q[i] = (i % 2 == 0) ? amplitude : amplitude / 2.0;
  }
  return s;
}

TEST(ArmModel, DefaultGeometry) {
  ArmModel m;
  EXPECT_NEAR(m.total_length(), 1.3, 1e-12);
  EXPECT_EQ(m.dof(), 24);
  m.validate();
}

TEST(Step, EquilibriumIsFixedPoint) {
  ArmModel m;
  Simulator sim(m);
  SimState s = SimState::rest(m);
  const PressureCommand zero{};
  for (int k = 0; k < 200; ++k) sim.step(s, zero, 0.005);
  EXPECT_LT(s.q.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(s.qdot.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Step, NeutralCommandHasZeroActuationTorque) {
  ArmModel m;
  Simulator sim(m);
  const Eigen::VectorXd tau =
      sim.actuation_torques(PressureCommand::uniform(m.rho_max / 2.0));
  EXPECT_EQ(tau.cwiseAbs().maxCoeff(), 0.0);

  // And the neutral command leaves dynamics identical to zero pressures.
  SimState a = bent_state(m, 0.1);
  SimState b = a;
  sim.step(a, PressureCommand{}, 0.005);
  sim.step(b, PressureCommand::uniform(m.rho_max / 2.0), 0.005);
  EXPECT_EQ((a.q - b.q).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((a.qdot - b.qdot).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Step, UndampedChainConservesEnergy) {
  const ArmModel m = conservative_hanging_model();
  Simulator sim(m);
  SimState s = bent_state(m, 0.08);
  const double e0 = sim.mechanical_energy(s);
  double max_drift = 0.0;
  const PressureCommand zero{};
  for (int k = 0; k < 1000; ++k) {  // 5 s at dt = 0.005
    sim.step(s, zero, 0.005);
    max_drift = std::max(max_drift, std::abs(sim.mechanical_energy(s) - e0));
    ASSERT_LT(s.q.cwiseAbs().maxCoeff(), m.joint_limit);  // stops stay inactive
  }
  EXPECT_LT(max_drift / std::abs(e0), 0.005);
}

TEST(Step, DampedChainIsPassive) {
  ArmModel m;
  m.hanging = true;
  m.base_height = 1.5;
  Simulator sim(m);
  SimState s = bent_state(m, 0.3);
  const double e0 = sim.mechanical_energy(s);
  double prev = e0;
  const PressureCommand zero{};
  for (int k = 0; k < 2000; ++k) {
    sim.step(s, zero, 0.005);
    const double e = sim.mechanical_energy(s);
    EXPECT_LE(e, prev + 1e-9 * std::max(1.0, std::abs(prev)));
    prev = e;
  }
  // And a substantial share of the initial swing energy is dissipated.
  SimState rest = SimState::rest(m);
  const double e_rest = sim.mechanical_energy(rest);
  EXPECT_LT(prev - e_rest, 0.5 * (e0 - e_rest));
}

TEST(Step, ReleasedObjectFollowsBallisticArc) {
  ArmModel m;
  Simulator sim(m);
  SimState s = SimState::rest(m);
  AttachedObject obj;
  obj.mass = 0.25;
  obj.released = true;
  obj.position = Eigen::Vector3d(0.0, 0.0, 1.0);
  obj.velocity = Eigen::Vector3d(1.0, 0.0, 0.0);
  s.object = obj;

  const Eigen::Vector3d p0 = obj.position;
  const Eigen::Vector3d v0 = obj.velocity;
  const PressureCommand zero{};
  double t = 0.0;
  for (int k = 0; k < 200 && !s.object->landed; ++k) {
    sim.step(s, zero, 0.005);
    t += 0.005;
    if (s.object->landed) break;
    const Eigen::Vector3d expected =
        oracle::ballistic_position(p0, v0, m.gravity, t);
    EXPECT_LT((s.object->position - expected).norm(), 1e-6) << "step " << k;
  }
  EXPECT_TRUE(s.object->landed);
  // Landing point from the closed form: z(t) = 1 - g t^2 / 2 = 0.
  const double t_land = std::sqrt(2.0 / m.gravity);
  EXPECT_NEAR(s.object->position.x(), t_land, 1e-9);
  EXPECT_NEAR(s.object->position.z(), 0.0, 1e-12);
}

TEST(Step, HardStopsClampAngles) {
  ArmModel m;
  for (auto& j : m.joints) j.torque_gain = 1.0;  // brutal actuation
  Simulator sim(m);
  SimState s = SimState::rest(m);
  PressureCommand c = PressureCommand::uniform(m.rho_max / 2.0);
  for (int j = 0; j < 3; ++j) {
    c[4 * j] = m.rho_max;
    c[4 * j + 1] = 0.0;
  }
  for (int k = 0; k < 600; ++k) {
    sim.step(s, c, 0.005);
    ASSERT_LE(s.q.cwiseAbs().maxCoeff(), m.joint_limit + 1e-15);
  }
  EXPECT_NEAR(s.q.cwiseAbs().maxCoeff(), m.joint_limit, 1e-12);
}

TEST(Step, DivergenceIsReported) {
  ArmModel m;
  Simulator sim(m);
  SimState s = SimState::rest(m);
  s.qdot[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sim.step(s, PressureCommand{}, 0.005), SimulationDiverged);
}

TEST(Rollout, AllZeroCommandsProduceNoMotion) {
  ArmModel m;
  TaskSpec task = TaskSpec::tip_speed_task();
  task.step_limit_kpa.reset();
  const std::vector<PressureCommand> cmds(
      static_cast<std::size_t>(task.horizon), PressureCommand{});
  const auto traj = rollout(m, task, cmds);
  ASSERT_EQ(traj.steps.size(), 10u);
  for (const auto& st : traj.steps) {
    EXPECT_LT(st.tip_velocity.norm(), 1e-6);
  }
  EXPECT_EQ(tip_speed_objective(traj), 0.0);
}

TEST(Rollout, DeterministicBitwise) {
  ArmModel m;
  TaskSpec task = TaskSpec::hammer_task();
  const auto actions = build_action_set(2, m.rho_max);
  std::vector<PressureCommand> cmds;
  for (std::uint64_t i = 0; i < 10; ++i) cmds.push_back(actions.action(4 * i + 3));
  const auto a = rollout(m, task, cmds);
  const auto b = rollout(m, task, cmds);
  ASSERT_EQ(a.dense.size(), b.dense.size());
  for (std::size_t i = 0; i < a.dense.size(); ++i) {
    EXPECT_EQ(a.dense[i].tip_position, b.dense[i].tip_position);
    EXPECT_EQ(a.dense[i].tip_velocity, b.dense[i].tip_velocity);
    EXPECT_EQ(a.dense[i].contact_force, b.dense[i].contact_force);
  }
}

TEST(Rollout, RecordsExactlyHorizonSteps) {
  ArmModel m;
  TaskSpec task = TaskSpec::throw_task();
  task.horizon = 7;
  const std::vector<PressureCommand> cmds(7, PressureCommand::uniform(102.5));
  const auto traj = rollout(m, task, cmds, 4);
  EXPECT_EQ(traj.steps.size(), 7u);
  EXPECT_EQ(traj.release_step.value(), 4);
  EXPECT_TRUE(traj.landing_position.has_value());
  EXPECT_THROW(rollout(m, task, cmds, 9), std::invalid_argument);
  EXPECT_THROW(rollout(m, task, {cmds.begin(), cmds.begin() + 3}, 2),
               std::invalid_argument);
}

TEST(Rollout, DropTestMatchesRestingTipProjection) {
  // Zero actuation from equilibrium: the object drops from the tip at
  // release and lands directly beneath it.
  ArmModel m;
  TaskSpec task = TaskSpec::throw_task();
  const std::vector<PressureCommand> cmds(10, PressureCommand{});
  const auto traj = rollout(m, task, cmds, task.horizon);
  ASSERT_TRUE(traj.landing_position.has_value());
  const auto& tip = traj.steps.back().tip_position;
  EXPECT_NEAR(traj.landing_position->x(), tip.x(), 1e-9);
  EXPECT_NEAR(traj.landing_position->y(), tip.y(), 1e-9);
  const double j = throw_objective(traj, task.horizon);
  EXPECT_NEAR(j, std::hypot(tip.x(), tip.y()), 1e-6);
}

Trajectory synthetic_trajectory(const std::vector<double>& speeds,
                                double d_cube) {
  Trajectory traj;
  for (double sp : speeds) {
    TrajectoryStep st;
    st.tip_velocity = Eigen::Vector3d(sp, 0.0, 0.0);
    traj.steps.push_back(st);
    DenseSample ds;
    ds.tip_velocity = st.tip_velocity;
    traj.dense.push_back(ds);
  }
  traj.landing_position = Eigen::Vector3d(d_cube, 0.0, 0.0);
  traj.release_step = static_cast<int>(speeds.size());
  return traj;
}

TEST(ThrowObjective, HandComputedExample) {
  const auto traj = synthetic_trajectory({1.0, 2.0, 3.0}, 4.0);
  EXPECT_DOUBLE_EQ(throw_objective(traj, 2), 7.0);   // 1 + 2 + 4
  EXPECT_DOUBLE_EQ(throw_objective(traj, 3), 10.0);  // 1 + 2 + 3 + 4
}

TEST(ThrowObjective, VelocitySumMonotoneInRelease) {
  const auto traj = synthetic_trajectory({0.5, 1.5, 0.25, 2.0, 1.0}, 2.0);
  double prev = -1.0;
  for (int tr = 1; tr <= 5; ++tr) {
    const double vsum = throw_objective(traj, tr) - 2.0;
    EXPECT_GE(vsum, prev);
    EXPECT_GE(vsum, 0.0);
    prev = vsum;
  }
}

TEST(ThrowObjective, LiteralIndicatorGatesDisplacement) {
  const auto traj = synthetic_trajectory({1.0, 2.0, 3.0}, 4.0);
  EXPECT_DOUBLE_EQ(throw_objective(traj, 2, /*literal=*/true), 3.0);
  EXPECT_DOUBLE_EQ(throw_objective(traj, 3, /*literal=*/true), 10.0);
}

TEST(HammerObjective, ZeroMotionPenaltyOnly) {
  TaskSpec task = TaskSpec::hammer_task();
  Trajectory traj;
  const Eigen::Vector3d pos = task.goal_position + Eigen::Vector3d(0.0, 0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    TrajectoryStep st;
    st.tip_position = pos;  // distance d = 1 from the sensor
    traj.steps.push_back(st);
  }
  // t0 = ceil(0.7 * 10) = 7 -> four penalty steps.
  EXPECT_EQ(task.first_penalty_step(), 7);
  EXPECT_DOUBLE_EQ(hammer_objective(traj, task), -4.0);
}

TEST(HammerObjective, SingleStepContribution) {
  TaskSpec task = TaskSpec::hammer_task();
  task.horizon = 1;  // t0 = 1, but place the tip on the goal: zero distance
  Trajectory traj;
  TrajectoryStep st;
  st.tip_position = task.goal_position;
  st.tip_velocity = Eigen::Vector3d(0.0, 0.0, -1.0);
  st.contact_force = 5.0;
  traj.steps.push_back(st);
  // m * vz + F = 2 * (-1) + 5 = 3.
  EXPECT_DOUBLE_EQ(hammer_objective(traj, task), 3.0);
}

TEST(HammerObjective, LinearInContactForce) {
  TaskSpec task = TaskSpec::hammer_task();
  ArmModel m;
  const auto actions = build_action_set(2, m.rho_max);
  std::vector<PressureCommand> cmds(10, actions.action(15));
  auto traj = rollout(m, task, cmds);
  const double base = hammer_objective(traj, task);
  traj.steps[4].contact_force += 17.5;
  EXPECT_NEAR(hammer_objective(traj, task), base + 17.5, 1e-12);
}

TEST(HammerObjective, ContactOnlyOnSensor) {
  ArmModel m;
  TaskSpec task = TaskSpec::hammer_task();
  const auto actions = build_action_set(2, m.rho_max);
  // Action 15 strikes the sensor (found by sweep); zero command does not.
  auto hit = rollout(m, task, std::vector<PressureCommand>(10, actions.action(15)));
  double fmax = 0.0;
  for (const auto& st : hit.steps) fmax = std::max(fmax, st.contact_force);
  EXPECT_GT(fmax, task.activation_force);

  auto miss = rollout(m, task, std::vector<PressureCommand>(10, PressureCommand{}));
  for (const auto& st : miss.steps) EXPECT_EQ(st.contact_force, 0.0);
}

TEST(TipSpeedObjective, MaxOverDenseTrace) {
  Trajectory traj;
  for (double sp : {1.0, 3.0, 2.0}) {
    DenseSample ds;
    ds.tip_velocity = Eigen::Vector3d(0.0, sp, 0.0);
    traj.dense.push_back(ds);
  }
  EXPECT_DOUBLE_EQ(tip_speed_objective(traj), 3.0);
  std::reverse(traj.dense.begin(), traj.dense.end());
  EXPECT_DOUBLE_EQ(tip_speed_objective(traj), 3.0);
}

TEST(TrajectoryCsv, HeaderAndRowShape) {
  ArmModel m;
  TaskSpec task = TaskSpec::tip_speed_task();
  task.horizon = 2;
  task.duration = 1.0;
  const auto traj = rollout(m, task, std::vector<PressureCommand>(
                                         2, PressureCommand::uniform(102.5)));
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  const std::string text = os.str();
  EXPECT_NE(text.find("t,tip_x,tip_y,tip_z,"), std::string::npos);
  // one header + one row per substep
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'),
            1 + static_cast<long>(traj.dense.size()));
}

}  // namespace
}  // namespace softbo
