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
// softbo CLI: run experiments, render results tables, emit SVG plots and
// replay best policies. Exit codes: 0 success, 2 configuration error,
// 3 partial failure (some cells failed).

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "softbo/config.hpp"
#include "softbo/experiment.hpp"
#include "softbo/report.hpp"
#include "softbo/version.hpp"

namespace {

int cmd_run(const std::string& config_path,
            const std::vector<std::string>& overrides) {
  softbo::KeyValueConfig kv = softbo::KeyValueConfig::from_file(config_path);
  for (const auto& o : overrides) kv.apply_override(o);
  const softbo::ExperimentConfig cfg = softbo::ExperimentConfig::resolve(kv);
  const softbo::RunSummary summary = softbo::run_experiment(cfg);
  std::cout << "[run] completed " << summary.completed.size() << ", skipped "
            << summary.skipped.size() << ", failed " << summary.failed.size()
            << "\n";
  for (const auto& [cell, reason] : summary.failed) {
    std::cout << "[run] failed cell " << cell << ": " << reason << "\n";
  }
  std::cout << "[run] results in " << cfg.output_dir << "\n";
  return summary.exit_code();
}

int cmd_table(const std::string& run_dir) {
  const softbo::ExperimentConfig cfg = softbo::load_run_config(run_dir);
  std::cout << softbo::write_table(cfg);
  return 0;
}

int cmd_plot(const std::string& run_dir) {
  const softbo::ExperimentConfig cfg = softbo::load_run_config(run_dir);
  for (const auto& file : softbo::write_plots(cfg)) {
    std::cout << "[plot] wrote " << file << "\n";
  }
  return 0;
}

int cmd_replay(const std::string& run_dir, const std::string& cell) {
  const softbo::ExperimentConfig cfg = softbo::load_run_config(run_dir);
  std::cout << "[replay] wrote " << softbo::replay_cell(cfg, cell) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box policy optimization for a simulated soft arm"};
  app.set_version_flag("--version", SOFTBO_VERSION);
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "execute an experiment grid");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--override", overrides, "key=value config overrides");

  std::string run_dir_table;
  auto* table = app.add_subcommand("table", "render the results table");
  table->add_option("run_dir", run_dir_table, "run directory")->required();

  std::string run_dir_plot;
  auto* plot = app.add_subcommand("plot", "emit SVG plots");
  plot->add_option("run_dir", run_dir_plot, "run directory")->required();

  std::string run_dir_replay, cell;
  auto* replay = app.add_subcommand("replay", "re-simulate a cell's best policy");
  replay->add_option("run_dir", run_dir_replay, "run directory")->required();
  replay->add_option("--cell", cell, "cell id, e.g. bayesopt-lei__P2__seed0")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, overrides);
    if (table->parsed()) return cmd_table(run_dir_table);
    if (plot->parsed()) return cmd_plot(run_dir_plot);
    if (replay->parsed()) return cmd_replay(run_dir_replay, cell);
  } catch (const softbo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
