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
// Experiment orchestration: every (method, P, seed) cell runs to the largest
// budget on its own deterministic substream, worker threads pull cells from a
// queue, and each cell persists its record CSV, best-policy command replay,
// and (for GP methods) the final surrogate dump. Completed cells are detected
// on rerun and skipped, which makes interrupted runs resumable.

#ifndef SOFTBO_EXPERIMENT_HPP_
#define SOFTBO_EXPERIMENT_HPP_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "softbo/config.hpp"
#include "softbo/errors.hpp"
#include "softbo/io.hpp"
#include "softbo/optimizers.hpp"
#include "softbo/policy.hpp"
#include "softbo/tasks.hpp"

namespace softbo {

struct CellId {
  std::string method;
  int discretization = 2;
  std::uint64_t seed = 0;

  std::string name() const {
    return method + "__P" + std::to_string(discretization) + "__seed" +
           std::to_string(seed);
  }
};

inline std::vector<CellId> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<CellId> cells;
  for (const auto& method : cfg.methods) {
    for (int p : cfg.p_values) {
      for (std::uint64_t seed : cfg.seeds) {
        cells.push_back({method, p, seed});
      }
    }
  }
  return cells;
}

// theta -> J through the policy codec and one simulator rollout.
class PolicyObjective {
 public:
  PolicyObjective(const ArmModel& model, const TaskSpec& task, int discretization)
      : model_(model), task_(task), actions_(discretization, model.rho_max) {
    task_.discretization = discretization;
    // The settled nominal pose is shared by every trial; compute it once.
    if (task_.settle_to_nominal && task_.nominal) {
      Simulator sim(model_);
      initial_state_ = settle(sim, *task_.nominal, task_.dt);
    }
  }

  const TaskSpec& task() const { return task_; }
  const ActionSet& actions() const { return actions_; }

  std::vector<PressureCommand> commands_for(const Eigen::VectorXd& theta,
                                            std::optional<int>* release) const {
    PolicyParams params;
    params.theta = theta;
    params.horizon = task_.horizon;
    params.includes_release = task_.kind == TaskKind::kThrow;
    const DecodedPolicy decoded = decode(params, actions_);
    if (release != nullptr) *release = decoded.release_step;
    return to_command_sequence(decoded.indices, actions_, task_.step_limit_kpa,
                               task_.nominal);
  }

  Trajectory simulate(const Eigen::VectorXd& theta) const {
    std::optional<int> release;
    const auto commands = commands_for(theta, &release);
    return rollout(model_, task_, commands, release, initial_state());
  }

  double operator()(const Eigen::VectorXd& theta) const {
    std::optional<int> release;
    const auto commands = commands_for(theta, &release);
    const Trajectory traj =
        rollout(model_, task_, commands, release, initial_state());
    switch (task_.kind) {
      case TaskKind::kThrow:
        return throw_objective(traj, release.value_or(task_.horizon),
                               task_.literal_throw_indicator);
      case TaskKind::kHammer:
        return hammer_objective(traj, task_);
      case TaskKind::kTipSpeed:
        return tip_speed_objective(traj);
    }
    return 0.0;
  }

  const SimState* initial_state() const {
    return initial_state_ ? &*initial_state_ : nullptr;
  }

 private:
  ArmModel model_;
  TaskSpec task_;
  ActionSet actions_;
  std::optional<SimState> initial_state_;
};

inline void write_records_csv(std::ostream& os,
                              const std::vector<TrialRecord>& records,
                              int dims, bool header = true) {
  if (header) {
    os << "method,seed,n";
    for (int j = 0; j < dims; ++j) os << ",theta_" << j;
    os << ",J,best_so_far,wall_time_ms\n";
  }
  for (const auto& rec : records) {
    os << rec.method << "," << rec.seed << "," << rec.trial_index;
    for (int j = 0; j < dims; ++j) os << "," << fmt_full(rec.theta[j]);
    os << "," << fmt_full(rec.objective) << "," << fmt_full(rec.best_so_far)
       << "," << fmt_full(rec.wall_time_ms) << "\n";
  }
}

inline std::vector<TrialRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records file: " + path);
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = split(line, ',');
  const int dims = static_cast<int>(header.size()) - 6;
  if (dims < 1) throw std::runtime_error("malformed records header: " + path);
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != dims + 6) {
      throw std::runtime_error("malformed records row in " + path);
    }
    TrialRecord rec;
    rec.method = fields[0];
    rec.seed = std::strtoull(fields[1].c_str(), nullptr, 10);
    rec.trial_index = std::atoi(fields[2].c_str());
    rec.theta.resize(dims);
    for (int j = 0; j < dims; ++j) {
      rec.theta[j] = std::strtod(fields[std::size_t(3 + j)].c_str(), nullptr);
    }
    rec.objective = std::strtod(fields[std::size_t(3 + dims)].c_str(), nullptr);
    rec.best_so_far = std::strtod(fields[std::size_t(4 + dims)].c_str(), nullptr);
    rec.wall_time_ms = std::strtod(fields[std::size_t(5 + dims)].c_str(), nullptr);
    out.push_back(std::move(rec));
  }
  return out;
}

struct RunSummary {
  std::vector<std::string> completed;
  std::vector<std::string> skipped;
  std::vector<std::pair<std::string, std::string>> failed;  // cell, reason

  int exit_code() const { return failed.empty() ? 0 : 3; }
};

namespace detail {

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

// One cell: run the method to the largest budget and persist its artifacts.
inline void run_cell(const ExperimentConfig& cfg, const CellId& cell,
                     const std::filesystem::path& cells_dir) {
  const int dims = cfg.task.param_dims();
  PolicyObjective policy(cfg.model, cfg.task, cell.discretization);

  Rng root(cell.seed);
  Rng method_rng = root.derive(cell.method).derive(
      static_cast<std::uint64_t>(cell.discretization));

  std::function<double(const Eigen::VectorXd&)> fn = std::cref(policy);
  if (cfg.noise_sigma > 0.0) {
    fn = with_observation_noise(fn, cfg.noise_sigma, method_rng.derive("noise"));
  }
  BudgetedObjective obj(fn, cfg.max_budget(), cell.method, cell.seed,
                        !cfg.deterministic_timings);

  std::optional<FittedGP> final_gp;
  std::vector<TrialRecord> records;
  if (cell.method == "bayesopt-lei" || cell.method == "bayesopt-ucb") {
    AcquisitionConfig acq = cfg.acquisition;
    acq.kind = cell.method == "bayesopt-lei" ? AcquisitionKind::kLogEi
                                             : AcquisitionKind::kUcb;
    records = bayesopt(obj, acq, dims, method_rng, cfg.bayes, &final_gp);
  } else if (cell.method == "cem") {
    records = cem(obj, cfg.cem_population, cfg.cem_elite_fraction, dims,
                  method_rng);
  } else {
    records = random_search(obj, cfg.random_population, dims, method_rng);
  }

  std::ostringstream csv;
  write_records_csv(csv, records, dims);
  write_file_atomic(cells_dir / (cell.name() + ".csv"), csv.str());

  // Best-policy command replay.
  const auto best = std::max_element(
      records.begin(), records.end(),
      [](const TrialRecord& a, const TrialRecord& b) {
        return a.objective < b.objective;
      });
  std::optional<int> release;
  const auto commands = policy.commands_for(best->theta, &release);
  std::ostringstream cmd_csv;
  write_command_csv(cmd_csv, commands);
  write_file_atomic(cells_dir / (cell.name() + "__best_commands.csv"),
                    cmd_csv.str());

  if (final_gp) {
    std::ostringstream gp_txt;
    final_gp->save_text(gp_txt);
    write_file_atomic(cells_dir / (cell.name() + "__gp.txt"), gp_txt.str());
  }

  write_file_atomic(cells_dir / (cell.name() + ".done"), "ok\n");
}

}  // namespace detail

// Executes every cell of the grid into cfg.output_dir. Cells already marked
// done are skipped, so an interrupted run resumes where it stopped. A cell
// whose simulation diverges is marked failed and the run continues.
inline RunSummary run_experiment(const ExperimentConfig& cfg,
                                 std::ostream& log = std::cout) {
  namespace fs = std::filesystem;
  const fs::path run_dir(cfg.output_dir);
  const fs::path cells_dir = run_dir / "cells";
  fs::create_directories(cells_dir);

  std::ostringstream manifest;
  cfg.write_manifest(manifest);
  const fs::path manifest_path = run_dir / "manifest.txt";
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    std::ostringstream existing;
    existing << in.rdbuf();
    if (existing.str() != manifest.str()) {
      throw ConfigError("run directory " + run_dir.string() +
                        " holds a different configuration; refusing to mix runs");
    }
  } else {
    detail::write_file_atomic(manifest_path, manifest.str());
  }

  const std::vector<CellId> cells = enumerate_cells(cfg);
  RunSummary summary;
  std::vector<int> status(cells.size(), 0);  // 0 pending, 1 done, 2 skip, 3 fail
  std::vector<std::string> reasons(cells.size());

  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const CellId& cell = cells[i];
      if (fs::exists(cells_dir / (cell.name() + ".done")) &&
          fs::exists(cells_dir / (cell.name() + ".csv"))) {
        status[i] = 2;
        continue;
      }
      {
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "[run] " << cell.name() << " started\n" << std::flush;
      }
      try {
        detail::run_cell(cfg, cell, cells_dir);
        status[i] = 1;
      } catch (const std::exception& e) {
        status[i] = 3;
        reasons[i] = e.what();
        detail::write_file_atomic(cells_dir / (cell.name() + ".failed"),
                                  std::string(e.what()) + "\n");
      }
      {
        std::lock_guard<std::mutex> lock(log_mutex);
        log << "[run] " << cell.name()
            << (status[i] == 1 ? " done" : " FAILED") << "\n"
            << std::flush;
      }
    }
  };

  const int n_workers =
      std::max(1, std::min<int>(cfg.workers, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (status[i] == 1) summary.completed.push_back(cells[i].name());
    if (status[i] == 2) summary.skipped.push_back(cells[i].name());
    if (status[i] == 3) summary.failed.emplace_back(cells[i].name(), reasons[i]);
  }

  // Merged record stream in deterministic cell order.
  std::ostringstream merged;
  bool header = true;
  for (const auto& cell : cells) {
    const fs::path csv = cells_dir / (cell.name() + ".csv");
    if (!fs::exists(csv)) continue;
    std::ifstream in(csv);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (first && !header) {
        first = false;
        continue;  // drop repeated header
      }
      merged << line << "\n";
      if (first) {
        first = false;
        header = false;
      }
    }
  }
  detail::write_file_atomic(run_dir / "records.csv", merged.str());
  return summary;
}

}  // namespace softbo

#endif  // SOFTBO_EXPERIMENT_HPP_
