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
// Open-loop pressure policies: continuous parameters in the unit box decode
// to sequences of discretized, antagonistically paired 12-chamber commands.
//
// Chamber layout: 4 chambers per continuum joint, joints in base-to-tip
// order. Antagonistic pairs are (0,1), (2,3) within each joint, so the free
// chambers are the even indices and each odd chamber is rho_max - partner.
// Action indices are lexicographic over the free-chamber digits with free
// chamber 0 most significant.

#ifndef SOFTBO_POLICY_HPP_
#define SOFTBO_POLICY_HPP_

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "softbo/io.hpp"

namespace softbo {

inline constexpr int kChamberCount = 12;
inline constexpr int kFreeChamberCount = 6;

struct PressureCommand {
  std::array<double, kChamberCount> kpa{};

  double operator[](int i) const { return kpa[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return kpa[static_cast<std::size_t>(i)]; }

  static PressureCommand uniform(double value) {
    PressureCommand c;
    c.kpa.fill(value);
    return c;
  }

  bool satisfies_pairing(double rho_max) const {
    for (int f = 0; f < kChamberCount; f += 2) {
      if (kpa[std::size_t(f)] + kpa[std::size_t(f + 1)] != rho_max) return false;
    }
    return true;
  }
};

// The discretized action set A_P. Actions are decoded on demand from their
// index, so P = 10 (one million actions) costs no memory.
class ActionSet {
 public:
  ActionSet(int discretization, double rho_max)
      : p_(discretization), rho_max_(rho_max) {
    if (p_ < 2) throw std::invalid_argument("ActionSet: P must be >= 2");
    if (!(rho_max_ > 0.0)) throw std::invalid_argument("ActionSet: rho_max must be > 0");
    size_ = 1;
    for (int i = 0; i < kFreeChamberCount; ++i) size_ *= std::uint64_t(p_);
  }

  int discretization() const { return p_; }
  double rho_max() const { return rho_max_; }
  std::uint64_t size() const { return size_; }

  PressureCommand action(std::uint64_t index) const {
    if (index >= size_) throw std::invalid_argument("ActionSet: index out of range");
    PressureCommand cmd;
    const double level = rho_max_ / double(p_ - 1);
    std::uint64_t rem = index;
    for (int f = kFreeChamberCount - 1; f >= 0; --f) {
      const auto digit = rem % std::uint64_t(p_);
      rem /= std::uint64_t(p_);
      const double value = double(digit) * level;
      cmd[2 * f] = value;
      cmd[2 * f + 1] = rho_max_ - value;
    }
    return cmd;
  }

 private:
  int p_;
  double rho_max_;
  std::uint64_t size_;
};

inline ActionSet build_action_set(int discretization, double rho_max) {
  return ActionSet(discretization, rho_max);
}

struct PolicyParams {
  Eigen::VectorXd theta;  // in [0,1]^D
  int horizon = 0;
  bool includes_release = false;

  int dims() const { return horizon + (includes_release ? 1 : 0); }

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("PolicyParams: horizon must be >= 1");
    if (theta.size() != dims()) {
      throw std::invalid_argument("PolicyParams: theta size must be H (+1 with release)");
    }
    if (!theta.allFinite() || (theta.array() < 0.0).any() ||
        (theta.array() > 1.0).any()) {
      throw std::invalid_argument("PolicyParams: theta must lie in [0,1]^D");
    }
  }
};

struct DecodedPolicy {
  std::vector<std::uint64_t> indices;   // H entries from the action index set
  std::optional<int> release_step;      // in {1..H} when present
};

// Scale-and-floor decode: index_t = min(floor(theta_t M), M-1); the release
// slot uses the same rule shifted onto {1..H}.
inline DecodedPolicy decode(const PolicyParams& params, const ActionSet& actions) {
  params.validate();
  DecodedPolicy out;
  const double m = double(actions.size());
  out.indices.reserve(static_cast<std::size_t>(params.horizon));
  for (int t = 0; t < params.horizon; ++t) {
    const auto idx = std::uint64_t(std::floor(params.theta[t] * m));
    out.indices.push_back(std::min(idx, actions.size() - 1));
  }
  if (params.includes_release) {
    const double h = double(params.horizon);
    const int slot = int(std::floor(params.theta[params.horizon] * h));
    out.release_step = std::min(slot, params.horizon - 1) + 1;
  }
  return out;
}

// Looks up each action; with a step limit, per-chamber changes from the
// previously emitted command (starting at `nominal`, default all rho_max/2)
// are clamped to +-step_limit. The clamp is applied to the free chamber and
// the partner recomputed, which keeps the pairing exact.
inline std::vector<PressureCommand> to_command_sequence(
    const std::vector<std::uint64_t>& indices, const ActionSet& actions,
    std::optional<double> step_limit = std::nullopt,
    std::optional<PressureCommand> nominal = std::nullopt) {
  std::vector<PressureCommand> out;
  out.reserve(indices.size());
  if (!step_limit) {
    for (auto idx : indices) out.push_back(actions.action(idx));
    return out;
  }
  const double limit = *step_limit;
  if (!(limit > 0.0)) throw std::invalid_argument("to_command_sequence: step limit must be > 0");
  PressureCommand prev =
      nominal.value_or(PressureCommand::uniform(actions.rho_max() / 2.0));
  for (auto idx : indices) {
    const PressureCommand target = actions.action(idx);
    PressureCommand cmd;
    for (int f = 0; f < kChamberCount; f += 2) {
      double value = target[f];
      value = std::min(value, prev[f] + limit);
      value = std::max(value, prev[f] - limit);
      value = std::min(std::max(value, 0.0), actions.rho_max());
      cmd[f] = value;
      cmd[f + 1] = actions.rho_max() - value;
    }
    out.push_back(cmd);
    prev = cmd;
  }
  return out;
}

// One row per timestep, 12 kPa columns, 3 decimals.
inline void write_command_csv(std::ostream& os,
                              const std::vector<PressureCommand>& commands) {
  os << "step";
  for (int c = 0; c < kChamberCount; ++c) os << ",chamber_" << c;
  os << "\n";
  for (std::size_t t = 0; t < commands.size(); ++t) {
    os << (t + 1);
    for (int c = 0; c < kChamberCount; ++c) {
      os << "," << fmt_fixed(commands[t][c], 3);
    }
    os << "\n";
  }
}

}  // namespace softbo

#endif  // SOFTBO_POLICY_HPP_
