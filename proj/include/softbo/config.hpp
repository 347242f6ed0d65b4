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
// Experiment configuration: a flat key-value text file with dotted section
// keys (`task.horizon = 10`), overridable from the command line. Resolution
// fills every default and validates against the module contracts, reporting
// all offending keys at once.

#ifndef SOFTBO_CONFIG_HPP_
#define SOFTBO_CONFIG_HPP_

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "softbo/acquisition.hpp"
#include "softbo/arm.hpp"
#include "softbo/errors.hpp"
#include "softbo/io.hpp"
#include "softbo/optimizers.hpp"
#include "softbo/tasks.hpp"
#include "softbo/version.hpp"

namespace softbo {

class KeyValueConfig {
 public:
  static KeyValueConfig from_string(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto trimmed = trim(line);
      if (trimmed.empty()) continue;
      const auto eq = trimmed.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected 'key = value'");
      }
      const std::string key{trim(trimmed.substr(0, eq))};
      const std::string value{trim(trimmed.substr(eq + 1))};
      if (key.empty()) {
        throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
      }
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static KeyValueConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  // "key=value" command-line override; takes precedence over file keys.
  void apply_override(const std::string& spec) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || trim(spec.substr(0, eq)).empty()) {
      throw ConfigError("override must look like key=value: " + spec);
    }
    set(std::string(trim(spec.substr(0, eq))),
        std::string(trim(spec.substr(eq + 1))));
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Accumulates per-key validation problems so a bad config reports everything
// at once.
class ConfigReader {
 public:
  explicit ConfigReader(const KeyValueConfig& kv) : kv_(kv) {}

  std::string get_string(const std::string& key, const std::string& fallback) {
    note(key, kv_.get(key, fallback));
    return kv_.get(key, fallback);
  }

  double get_double(const std::string& key, double fallback) {
    if (!kv_.has(key)) {
      note(key, fmt_full(fallback));
      return fallback;
    }
    const std::string raw = kv_.get(key, "");
    char* end = nullptr;
    const double v = std::strtod(raw.c_str(), &end);
    if (end == raw.c_str() || *end != '\0') {
      fail(key, "not a number: '" + raw + "'");
      return fallback;
    }
    note(key, fmt_full(v));
    return v;
  }

  int get_int(const std::string& key, int fallback) {
    const double v = get_double(key, fallback);
    if (v != static_cast<int>(v)) fail(key, "not an integer");
    return static_cast<int>(v);
  }

  bool get_bool(const std::string& key, bool fallback) {
    if (!kv_.has(key)) {
      note(key, fallback ? "true" : "false");
      return fallback;
    }
    const std::string raw = kv_.get(key, "");
    if (raw == "true" || raw == "1") {
      note(key, "true");
      return true;
    }
    if (raw == "false" || raw == "0") {
      note(key, "false");
      return false;
    }
    fail(key, "not a boolean: '" + raw + "'");
    return fallback;
  }

  template <typename T, typename Parse>
  std::vector<T> get_list(const std::string& key, const std::string& fallback,
                          Parse parse) {
    const std::string raw = kv_.get(key, fallback);
    note(key, raw);
    std::vector<T> out;
    for (const auto& field : split(raw, ',')) {
      if (field.empty()) continue;
      out.push_back(parse(field));
    }
    return out;
  }

  void fail(const std::string& key, const std::string& why) {
    problems_.push_back(key + ": " + why);
  }

  void require(bool ok, const std::string& key, const std::string& why) {
    if (!ok) fail(key, why);
  }

  void finish() const {
    if (problems_.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& p : problems_) msg += "\n  " + p;
    throw ConfigError(msg);
  }

  // Every key this reader touched, with its resolved value.
  const std::map<std::string, std::string>& resolved() const { return resolved_; }

 private:
  void note(const std::string& key, const std::string& value) {
    resolved_[key] = value;
  }

  const KeyValueConfig& kv_;
  std::vector<std::string> problems_;
  std::map<std::string, std::string> resolved_;
};

struct ExperimentConfig {
  TaskSpec task;
  ArmModel model;
  std::vector<std::string> methods;
  std::vector<int> p_values;
  std::vector<int> budgets;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
  int workers = 1;
  double noise_sigma = 0.0;
  bool deterministic_timings = false;

  AcquisitionConfig acquisition;  // kappa/candidates/refinement defaults
  BayesOptSettings bayes;
  int cem_population = 50;
  double cem_elite_fraction = 0.2;
  int random_population = 50;

  // Full resolved key set (config + defaulted constants) for the manifest.
  std::map<std::string, std::string> resolved;

  int max_budget() const {
    int m = 0;
    for (int b : budgets) m = std::max(m, b);
    return m;
  }

  static ExperimentConfig resolve(const KeyValueConfig& kv);
  void write_manifest(std::ostream& os) const;
};

inline ExperimentConfig ExperimentConfig::resolve(const KeyValueConfig& kv) {
  ConfigReader r(kv);
  ExperimentConfig cfg;

  // --- task ---
  const std::string kind = r.get_string("task.kind", "throw");
  if (kind == "throw") {
    cfg.task = TaskSpec::throw_task();
  } else if (kind == "hammer") {
    cfg.task = TaskSpec::hammer_task();
  } else if (kind == "tipspeed") {
    cfg.task = TaskSpec::tip_speed_task();
  } else {
    r.fail("task.kind", "must be throw|hammer|tipspeed, got '" + kind + "'");
  }
  cfg.task.horizon = r.get_int("task.horizon", cfg.task.horizon);
  cfg.task.duration = r.get_double("task.duration", cfg.task.duration);
  cfg.task.dt = r.get_double("task.dt", cfg.task.dt);
  cfg.task.object_mass = r.get_double("task.object_mass", cfg.task.object_mass);
  cfg.task.goal_position.x() = r.get_double("task.goal_x", cfg.task.goal_position.x());
  cfg.task.goal_position.y() = r.get_double("task.goal_y", cfg.task.goal_position.y());
  cfg.task.goal_position.z() = r.get_double("task.goal_z", cfg.task.goal_position.z());
  cfg.task.sensor_radius = r.get_double("task.sensor_radius", cfg.task.sensor_radius);
  cfg.task.activation_force = r.get_double("task.activation_force", cfg.task.activation_force);
  cfg.task.flight_timeout = r.get_double("task.flight_timeout", cfg.task.flight_timeout);
  {
    const double fallback = cfg.task.step_limit_kpa.value_or(0.0);
    const double limit = r.get_double("task.step_limit_kpa", fallback);
    if (limit > 0.0) {
      cfg.task.step_limit_kpa = limit;
    } else {
      cfg.task.step_limit_kpa.reset();
    }
  }
  cfg.task.settle_to_nominal =
      r.get_bool("task.settle_to_nominal", cfg.task.settle_to_nominal);
  cfg.task.literal_throw_indicator =
      r.get_bool("task.literal_throw_indicator", cfg.task.literal_throw_indicator);
  cfg.task.hammer_momentum_sign =
      r.get_double("task.hammer_momentum_sign", cfg.task.hammer_momentum_sign);
  r.require(cfg.task.horizon >= 1, "task.horizon", "must be >= 1");
  r.require(cfg.task.duration > 0.0, "task.duration", "must be > 0");
  r.require(cfg.task.dt > 0.0, "task.dt", "must be > 0");

  // --- model ---
  ContinuumJointParams joint;
  joint.disk_count = r.get_int("model.disk_count", joint.disk_count);
  joint.segment_length = r.get_double("model.segment_length", joint.segment_length);
  joint.disk_mass = r.get_double("model.disk_mass", joint.disk_mass);
  joint.stiffness = r.get_double("model.stiffness", joint.stiffness);
  joint.damping = r.get_double("model.damping", joint.damping);
  joint.torque_gain = r.get_double("model.torque_gain", joint.torque_gain);
  cfg.model.joints = {joint, joint, joint};
  RigidLinkParams link;
  link.length = r.get_double("model.link_length", link.length);
  link.mass = r.get_double("model.link_mass", link.mass);
  cfg.model.links = {link, link};
  cfg.model.gravity = r.get_double("model.gravity", cfg.model.gravity);
  cfg.model.rho_max = r.get_double("model.rho_max", cfg.model.rho_max);
  cfg.model.hanging = r.get_bool("model.hanging", cfg.model.hanging);
  cfg.model.base_height = r.get_double("model.base_height", cfg.model.base_height);
  cfg.model.joint_limit = r.get_double("model.joint_limit", cfg.model.joint_limit);
  cfg.model.tip_radius = r.get_double("model.tip_radius", cfg.model.tip_radius);
  cfg.model.contact_stiffness =
      r.get_double("model.contact_stiffness", cfg.model.contact_stiffness);
  cfg.model.tip_ground_contact =
      r.get_bool("model.tip_ground_contact", cfg.model.tip_ground_contact);
  try {
    cfg.model.validate();
  } catch (const std::exception& e) {
    r.fail("model.*", e.what());
  }

  // Step-clamp nominal command (kPa applied to the free chambers).
  {
    const double nominal = r.get_double("task.nominal_kpa", cfg.model.rho_max / 2.0);
    if (cfg.task.step_limit_kpa) {
      PressureCommand cmd;
      for (int f = 0; f < kChamberCount; f += 2) {
        cmd[f] = nominal;
        cmd[f + 1] = cfg.model.rho_max - nominal;
      }
      cfg.task.nominal = cmd;
    }
  }

  // --- experiment grid ---
  cfg.methods = r.get_list<std::string>(
      "experiment.methods", "bayesopt-lei,bayesopt-ucb,cem,random-search",
      [](const std::string& s) { return s; });
  for (const auto& m : cfg.methods) {
    if (m != "bayesopt-lei" && m != "bayesopt-ucb" && m != "cem" &&
        m != "random-search") {
      r.fail("experiment.methods", "unknown method '" + m + "'");
    }
  }
  auto parse_int = [&](const std::string& s) { return std::atoi(s.c_str()); };
  cfg.p_values = r.get_list<int>("experiment.p_values", "2,5", parse_int);
  cfg.budgets = r.get_list<int>("experiment.budgets", "100,500", parse_int);
  cfg.seeds = r.get_list<std::uint64_t>(
      "experiment.seeds", "0,1,2,3,4", [](const std::string& s) {
        return static_cast<std::uint64_t>(std::strtoull(s.c_str(), nullptr, 10));
      });
  r.require(!cfg.methods.empty(), "experiment.methods", "must be non-empty");
  r.require(!cfg.p_values.empty(), "experiment.p_values", "must be non-empty");
  r.require(!cfg.budgets.empty(), "experiment.budgets", "must be non-empty");
  r.require(!cfg.seeds.empty(), "experiment.seeds", "must be non-empty");
  for (int p : cfg.p_values) {
    r.require(p >= 2, "experiment.p_values", "discretization must be >= 2");
  }
  bool has_bayesopt = false, has_cem = false;
  for (const auto& m : cfg.methods) {
    has_bayesopt |= m.rfind("bayesopt", 0) == 0;
    has_cem |= m == "cem";
  }
  for (int b : cfg.budgets) {
    r.require(b >= 1, "experiment.budgets", "budgets must be >= 1");
    if (has_bayesopt) {
      r.require(b > cfg.task.param_dims() + 1, "experiment.budgets",
                "bayesopt budgets must exceed D+1 initial trials");
    }
  }

  // --- output / runtime ---
  cfg.output_dir = r.get_string("output.dir", "runs/out");
  cfg.deterministic_timings =
      r.get_bool("output.deterministic_timings", false);
  cfg.workers = r.get_int("runtime.workers", 0);
  if (const char* env = std::getenv("SOFTBO_WORKERS")) {
    cfg.workers = std::atoi(env);
  }
  if (cfg.workers <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    cfg.workers = hw == 0 ? 1 : static_cast<int>(hw);
  }
  cfg.noise_sigma = r.get_double("objective.noise_sigma", 0.0);
  r.require(cfg.noise_sigma >= 0.0, "objective.noise_sigma", "must be >= 0");

  // --- method settings ---
  cfg.acquisition.kappa = r.get_double("bayesopt.kappa", 0.9);
  cfg.acquisition.candidate_count = r.get_int("bayesopt.candidates", 512);
  cfg.acquisition.refine_count = r.get_int("bayesopt.refine_count", 10);
  cfg.acquisition.refine_steps = r.get_int("bayesopt.refine_steps", 50);
  cfg.bayes.initial_restarts = r.get_int("bayesopt.initial_restarts", 8);
  cfg.bayes.refit_restarts = r.get_int("bayesopt.refit_restarts", 2);
  cfg.bayes.large_budget_threshold =
      r.get_int("bayesopt.large_budget_threshold", 200);
  cfg.bayes.large_budget_refit_period =
      r.get_int("bayesopt.refit_period", 5);
  cfg.bayes.initial_design = r.get_int("bayesopt.initial_design", 0);
  try {
    cfg.acquisition.validate();
  } catch (const std::exception& e) {
    r.fail("bayesopt.*", e.what());
  }
  cfg.cem_population = r.get_int("cem.population", 50);
  cfg.cem_elite_fraction = r.get_double("cem.elite_fraction", 0.2);
  cfg.random_population = r.get_int("random.population", 50);
  r.require(cfg.cem_population >= 1, "cem.population", "must be >= 1");
  r.require(cfg.cem_elite_fraction > 0.0 && cfg.cem_elite_fraction <= 1.0,
            "cem.elite_fraction", "must lie in (0, 1]");
  if (has_cem) {
    for (int b : cfg.budgets) {
      r.require(b >= cfg.cem_population, "experiment.budgets",
                "cem budgets must cover at least one population");
    }
  }

  r.finish();
  cfg.resolved = r.resolved();
  return cfg;
}

inline void ExperimentConfig::write_manifest(std::ostream& os) const {
  os << "softbo.version = " << SOFTBO_VERSION << "\n";
  for (const auto& [key, value] : resolved) {
    os << "config." << key << " = " << value << "\n";
  }
}

}  // namespace softbo

#endif  // SOFTBO_CONFIG_HPP_
