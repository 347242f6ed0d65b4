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
// Post-hoc reporting over a run directory: the mean +- std results table at
// each budget checkpoint (the 500-trial stream subsumes the 100-trial column)
// and the best-so-far / tip-speed SVG plots.

#ifndef SOFTBO_REPORT_HPP_
#define SOFTBO_REPORT_HPP_

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "softbo/config.hpp"
#include "softbo/experiment.hpp"
#include "softbo/svg.hpp"

namespace softbo {

// Rebuilds the experiment configuration from a run manifest.
inline ExperimentConfig load_run_config(const std::string& run_dir) {
  const std::filesystem::path manifest =
      std::filesystem::path(run_dir) / "manifest.txt";
  if (!std::filesystem::exists(manifest)) {
    throw ConfigError("no manifest in run directory: " + run_dir);
  }
  const KeyValueConfig raw = KeyValueConfig::from_file(manifest.string());
  KeyValueConfig stripped;
  for (const auto& [key, value] : raw.entries()) {
    if (key.rfind("config.", 0) == 0) stripped.set(key.substr(7), value);
  }
  ExperimentConfig cfg = ExperimentConfig::resolve(stripped);
  cfg.output_dir = run_dir;
  return cfg;
}

struct TableCell {
  double mean = 0.0;
  double stddev = 0.0;
  int seed_count = 0;
  bool complete = false;
};

struct ResultsTable {
  std::vector<std::string> methods;
  std::vector<int> budgets;
  std::vector<int> p_values;
  // (method, budget, P) -> statistics of final best_so_far across seeds
  std::map<std::tuple<std::string, int, int>, TableCell> cells;
  std::map<std::pair<int, int>, std::string> top_method;  // (P, budget) -> id
};

// best_so_far at trial n = budget, i.e. the running max of the first
// `budget` records.
inline std::optional<double> best_at_checkpoint(
    const std::vector<TrialRecord>& records, int budget) {
  if (static_cast<int>(records.size()) < budget || budget < 1) return std::nullopt;
  return records[std::size_t(budget - 1)].best_so_far;
}

inline ResultsTable build_table(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path cells_dir = fs::path(cfg.output_dir) / "cells";
  ResultsTable table;
  table.methods = cfg.methods;
  table.budgets = cfg.budgets;
  table.p_values = cfg.p_values;

  for (const auto& method : cfg.methods) {
    for (int p : cfg.p_values) {
      std::vector<std::vector<TrialRecord>> per_seed;
      for (std::uint64_t seed : cfg.seeds) {
        const CellId cell{method, p, seed};
        const fs::path csv = cells_dir / (cell.name() + ".csv");
        if (fs::exists(csv)) per_seed.push_back(read_records_csv(csv.string()));
      }
      for (int budget : cfg.budgets) {
        TableCell out;
        std::vector<double> finals;
        for (const auto& records : per_seed) {
          const auto value = best_at_checkpoint(records, budget);
          if (value) finals.push_back(*value);
        }
        out.seed_count = static_cast<int>(finals.size());
        out.complete = out.seed_count == static_cast<int>(cfg.seeds.size());
        if (!finals.empty()) {
          double mean = 0.0;
          for (double v : finals) mean += v;
          mean /= double(finals.size());
          double var = 0.0;
          for (double v : finals) var += (v - mean) * (v - mean);
          out.mean = mean;
          out.stddev = finals.size() > 1
                           ? std::sqrt(var / double(finals.size() - 1))
                           : 0.0;
        }
        table.cells[{method, budget, p}] = out;
      }
    }
  }

  for (int p : cfg.p_values) {
    for (int budget : cfg.budgets) {
      std::string best;
      double best_mean = -std::numeric_limits<double>::infinity();
      for (const auto& method : cfg.methods) {
        const auto& cell = table.cells.at({method, budget, p});
        if (cell.seed_count > 0 && cell.mean > best_mean) {
          best_mean = cell.mean;
          best = method;
        }
      }
      table.top_method[{p, budget}] = best;
    }
  }
  return table;
}

inline std::string render_table_text(const ResultsTable& table) {
  std::ostringstream os;
  const int label_w = 22;
  os << std::string(label_w, ' ') << "trials";
  for (int p : table.p_values) {
    std::string head = "P=" + std::to_string(p);
    os << "  " << head << std::string(head.size() > 20 ? 0 : 20 - head.size(), ' ');
  }
  os << "\n";
  for (const auto& method : table.methods) {
    for (int budget : table.budgets) {
      std::string label = method;
      label.resize(label_w, ' ');
      os << label;
      std::string b = std::to_string(budget);
      os << b << std::string(b.size() > 6 ? 0 : 6 - b.size(), ' ');
      for (int p : table.p_values) {
        const auto& cell = table.cells.at({method, budget, p});
        std::string text;
        if (cell.seed_count == 0) {
          text = "--";
        } else {
          text = fmt_fixed(cell.mean, 3) + " +- " + fmt_fixed(cell.stddev, 3);
          if (table.top_method.at({p, budget}) == method) text += " *";
          if (!cell.complete) text += " (partial)";
        }
        os << "  " << text
           << std::string(text.size() > 20 ? 0 : 20 - text.size(), ' ');
      }
      os << "\n";
    }
  }
  os << "\n* best mean for that (P, trials) column\n";
  return os.str();
}

inline std::string render_table_csv(const ResultsTable& table) {
  std::ostringstream os;
  os << "method,budget,P,mean,std,seeds,top\n";
  for (const auto& method : table.methods) {
    for (int budget : table.budgets) {
      for (int p : table.p_values) {
        const auto& cell = table.cells.at({method, budget, p});
        os << method << "," << budget << "," << p << ",";
        if (cell.seed_count == 0) {
          os << ",,0,0\n";
          continue;
        }
        os << fmt_full(cell.mean) << "," << fmt_full(cell.stddev) << ","
           << cell.seed_count << ","
           << (table.top_method.at({p, budget}) == method ? 1 : 0) << "\n";
      }
    }
  }
  return os.str();
}

// Emits table.txt and table.csv into the run directory; returns the text form.
inline std::string write_table(const ExperimentConfig& cfg) {
  const ResultsTable table = build_table(cfg);
  detail::write_file_atomic(std::filesystem::path(cfg.output_dir) / "table.txt",
                            render_table_text(table));
  detail::write_file_atomic(std::filesystem::path(cfg.output_dir) / "table.csv",
                            render_table_csv(table));
  return render_table_text(table);
}

// Best-so-far curves (mean across seeds with min-max band) per method, one
// SVG per P, plus tip-speed-vs-time traces of each method's best policy.
// Returns the list of files written; writes nothing for an empty run.
inline std::vector<std::string> write_plots(const ExperimentConfig& cfg,
                                            std::ostream& log = std::cout) {
  namespace fs = std::filesystem;
  const fs::path cells_dir = fs::path(cfg.output_dir) / "cells";
  const fs::path plot_dir = fs::path(cfg.output_dir) / "plots";
  std::vector<std::string> written;

  bool any = false;
  for (int p : cfg.p_values) {
    SvgChart chart("Best so far, P=" + std::to_string(p), "trial",
                   "best objective");
    std::size_t color = 0;
    bool chart_has_data = false;
    for (const auto& method : cfg.methods) {
      std::vector<std::vector<TrialRecord>> per_seed;
      std::size_t min_len = SIZE_MAX;
      for (std::uint64_t seed : cfg.seeds) {
        const fs::path csv = cells_dir / (CellId{method, p, seed}.name() + ".csv");
        if (!fs::exists(csv)) continue;
        per_seed.push_back(read_records_csv(csv.string()));
        min_len = std::min(min_len, per_seed.back().size());
      }
      if (per_seed.empty() || min_len == 0 || min_len == SIZE_MAX) continue;
      SvgSeries series;
      series.label = method;
      series.color = series_color(color++);
      for (std::size_t n = 0; n < min_len; ++n) {
        double mean = 0.0;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& records : per_seed) {
          const double v = records[n].best_so_far;
          mean += v;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
        mean /= double(per_seed.size());
        series.x.push_back(double(n + 1));
        series.y.push_back(mean);
        series.y_low.push_back(lo);
        series.y_high.push_back(hi);
      }
      chart.add_series(std::move(series));
      chart_has_data = true;
    }
    if (chart_has_data) {
      fs::create_directories(plot_dir);
      const fs::path file = plot_dir / ("best_so_far_P" + std::to_string(p) + ".svg");
      detail::write_file_atomic(file, chart.render());
      written.push_back(file.string());
      any = true;
    }
  }

  // Tip-speed traces for each method's best policy across all its cells.
  SvgChart speed_chart("Tip speed of best policy per method", "time [s]",
                       "tip speed [m/s]");
  std::size_t color = 0;
  bool speed_has_data = false;
  for (const auto& method : cfg.methods) {
    double best_j = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_theta;
    int best_p = 0;
    for (int p : cfg.p_values) {
      for (std::uint64_t seed : cfg.seeds) {
        const fs::path csv = cells_dir / (CellId{method, p, seed}.name() + ".csv");
        if (!fs::exists(csv)) continue;
        for (const auto& rec : read_records_csv(csv.string())) {
          if (rec.objective > best_j) {
            best_j = rec.objective;
            best_theta = rec.theta;
            best_p = p;
          }
        }
      }
    }
    if (best_p == 0) continue;
    PolicyObjective policy(cfg.model, cfg.task, best_p);
    const Trajectory traj = policy.simulate(best_theta);
    SvgSeries series;
    series.label = method;
    series.color = series_color(color++);
    for (const auto& s : traj.dense) {
      series.x.push_back(s.t);
      series.y.push_back(s.tip_velocity.norm());
    }
    speed_chart.add_series(std::move(series));
    speed_has_data = true;
  }
  if (speed_has_data) {
    fs::create_directories(plot_dir);
    const fs::path file = plot_dir / "tip_speed.svg";
    detail::write_file_atomic(file, speed_chart.render());
    written.push_back(file.string());
    any = true;
  }

  if (!any) {
    log << "[plot] no completed cells in " << cfg.output_dir
        << "; nothing to plot\n";
  }
  return written;
}

// Re-simulates the best trial of one cell and exports its dense trajectory.
inline std::string replay_cell(const ExperimentConfig& cfg,
                               const std::string& cell_name) {
  namespace fs = std::filesystem;
  const fs::path csv = fs::path(cfg.output_dir) / "cells" / (cell_name + ".csv");
  if (!fs::exists(csv)) {
    throw ConfigError("no such cell in run: " + cell_name);
  }
  const auto records = read_records_csv(csv.string());
  if (records.empty()) throw ConfigError("cell has no records: " + cell_name);

  // Recover P from the cell name (…__P<p>__seed<s>).
  int p = 0;
  const auto pos = cell_name.find("__P");
  if (pos != std::string::npos) p = std::atoi(cell_name.c_str() + pos + 3);
  if (p < 2) throw ConfigError("cannot parse discretization from cell name: " + cell_name);

  const auto best = std::max_element(
      records.begin(), records.end(),
      [](const TrialRecord& a, const TrialRecord& b) {
        return a.objective < b.objective;
      });
  PolicyObjective policy(cfg.model, cfg.task, p);
  const Trajectory traj = policy.simulate(best->theta);

  const fs::path replay_dir = fs::path(cfg.output_dir) / "replays";
  fs::create_directories(replay_dir);
  const fs::path out = replay_dir / (cell_name + "__trajectory.csv");
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  detail::write_file_atomic(out, os.str());
  return out.string();
}

}  // namespace softbo

#endif  // SOFTBO_REPORT_HPP_
