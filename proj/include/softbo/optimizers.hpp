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
// Episodic policy-search strategies over the unit box with a shared budgeted
// evaluation contract: Bayesian optimization (GP surrogate + acquisition),
// the cross-entropy method, and batched random search. The reported optimum
// is always the best *observed* objective value.

#ifndef SOFTBO_OPTIMIZERS_HPP_
#define SOFTBO_OPTIMIZERS_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "softbo/acquisition.hpp"
#include "softbo/errors.hpp"
#include "softbo/gp.hpp"
#include "softbo/rng.hpp"

namespace softbo {

struct TrialRecord {
  std::string method;
  std::uint64_t seed = 0;
  int trial_index = 0;  // 1-based
  Eigen::VectorXd theta;
  double objective = 0.0;
  double best_so_far = 0.0;
  double wall_time_ms = 0.0;
  bool gp_fallback = false;  // proposal came from the random fallback
};

// Wraps the objective callback, enforces the evaluation budget, and appends
// one TrialRecord per evaluation.
class BudgetedObjective {
 public:
  BudgetedObjective(std::function<double(const Eigen::VectorXd&)> fn, int budget,
                    std::string method, std::uint64_t seed,
                    bool record_wall_time = true)
      : fn_(std::move(fn)),
        budget_(budget),
        method_(std::move(method)),
        seed_(seed),
        record_wall_time_(record_wall_time) {
    if (budget_ < 1) throw std::invalid_argument("BudgetedObjective: budget must be >= 1");
  }

  int budget() const { return budget_; }
  int evaluations_used() const { return static_cast<int>(records_.size()); }
  int remaining() const { return budget_ - evaluations_used(); }
  bool exhausted() const { return remaining() <= 0; }
  const std::vector<TrialRecord>& records() const { return records_; }
  std::vector<TrialRecord> take_records() { return std::move(records_); }

  double best_so_far() const {
    return records_.empty() ? -std::numeric_limits<double>::infinity()
                            : records_.back().best_so_far;
  }

  double evaluate(const Eigen::VectorXd& theta, bool gp_fallback = false) {
    if (exhausted()) {
      throw std::logic_error("BudgetedObjective: budget exhausted");
    }
    const auto start = std::chrono::steady_clock::now();
    const double value = fn_(theta);
    const auto stop = std::chrono::steady_clock::now();

    TrialRecord rec;
    rec.method = method_;
    rec.seed = seed_;
    rec.trial_index = evaluations_used() + 1;
    rec.theta = theta;
    rec.objective = value;
    rec.best_so_far = records_.empty() ? value : std::max(value, records_.back().best_so_far);
    rec.wall_time_ms =
        record_wall_time_
            ? std::chrono::duration<double, std::milli>(stop - start).count()
            : 0.0;
    rec.gp_fallback = gp_fallback;
    records_.push_back(std::move(rec));
    return value;
  }

 private:
  std::function<double(const Eigen::VectorXd&)> fn_;
  int budget_;
  std::string method_;
  std::uint64_t seed_;
  bool record_wall_time_;
  std::vector<TrialRecord> records_;
};

struct BayesOptSettings {
  HyperPriors priors{};
  JitterPolicy jitter{};
  int initial_restarts = 8;
  // Refits after the initial fit reuse the incumbent hyperparameters as a
  // warm start plus this many fresh restarts.
  int refit_restarts = 2;
  // Full refit cadence: every iteration up to this budget, else every 5th.
  int large_budget_threshold = 200;
  int large_budget_refit_period = 5;
  // Number of uniform initial trials; 0 means the D+1 default.
  int initial_design = 0;
};

namespace detail {

inline Eigen::VectorXd uniform_vector(Rng& rng, int dims) {
  Eigen::VectorXd x(dims);
  for (int i = 0; i < dims; ++i) x[i] = rng.uniform();
  return x;
}

inline TrainingSet records_to_training_set(const std::vector<TrialRecord>& recs,
                                           int dims) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(recs.size()), dims);
  Eigen::VectorXd y(static_cast<Eigen::Index>(recs.size()));
  for (std::size_t i = 0; i < recs.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = recs[i].theta.transpose();
    y[static_cast<Eigen::Index>(i)] = recs[i].objective;
  }
  return TrainingSet::from(std::move(X), std::move(y));
}

}  // namespace detail

// GP-based search: D+1 uniform initial trials, then acquisition-driven
// proposals with the model refit as the dataset grows. Falls back to a
// uniform proposal for an iteration when the GP cannot be fit. The final
// surrogate is exposed through final_gp for persistence.
inline std::vector<TrialRecord> bayesopt(BudgetedObjective& obj,
                                         AcquisitionConfig acq, int dims,
                                         Rng rng,
                                         const BayesOptSettings& settings = {},
                                         std::optional<FittedGP>* final_gp = nullptr) {
  const int n_init =
      settings.initial_design > 0 ? settings.initial_design : dims + 1;
  if (obj.budget() <= n_init) {
    throw std::invalid_argument("bayesopt: budget must exceed the initial trials");
  }
  Rng init_rng = rng.derive("bo.init");
  for (int i = 0; i < n_init && !obj.exhausted(); ++i) {
    obj.evaluate(detail::uniform_vector(init_rng, dims));
  }

  const int refit_period =
      obj.budget() > settings.large_budget_threshold
          ? settings.large_budget_refit_period
          : 1;

  FitOptions fit_opts;
  fit_opts.priors = settings.priors;
  fit_opts.jitter = settings.jitter;

  std::optional<FittedGP> gp;
  int last_fit_size = 0;
  int iteration = 0;
  while (!obj.exhausted()) {
    ++iteration;
    const auto& recs = obj.records();
    bool proposal_ready = false;
    Eigen::VectorXd theta;
    try {
      TrainingSet ts = detail::records_to_training_set(recs, dims);
      const bool full_refit =
          !gp.has_value() || ((iteration - 1) % refit_period == 0);
      if (full_refit) {
        FitOptions opts = fit_opts;
        int restarts = settings.initial_restarts;
        if (gp.has_value()) {
          restarts = settings.refit_restarts;
          opts.extra_starts.push_back(gp->hyperparams());
        }
        gp = fit(ts, restarts, rng.derive("bo.fit").derive(std::uint64_t(iteration)), opts);
      } else {
        // Posterior-only update: same hyperparameters, new data.
        gp = FittedGP::make(std::move(ts), gp->hyperparams(), settings.jitter);
      }
      last_fit_size = static_cast<int>(recs.size());
      AcquisitionConfig cfg = acq;
      cfg.incumbent = obj.best_so_far();
      theta = maximize(*gp, cfg,
                       rng.derive("bo.acq").derive(std::uint64_t(iteration)));
      proposal_ready = true;
    } catch (const NumericalFailure&) {
      gp.reset();
      last_fit_size = 0;
    }
    if (proposal_ready) {
      obj.evaluate(theta);
    } else {
      Rng fb = rng.derive("bo.fallback").derive(std::uint64_t(iteration));
      obj.evaluate(detail::uniform_vector(fb, dims), /*gp_fallback=*/true);
    }
  }
  (void)last_fit_size;
  if (final_gp != nullptr) *final_gp = std::move(gp);
  return obj.records();
}

struct CemSettings {
  double initial_sigma = 0.5;      // covers the unit box
  double variance_floor = 1e-6;
};

// Cross-entropy method: diagonal Gaussian refit to the elite fraction each
// generation, candidates clamped to the box by truncation.
inline std::vector<TrialRecord> cem(BudgetedObjective& obj, int population,
                                    double elite_fraction, int dims, Rng rng,
                                    const CemSettings& settings = {}) {
  if (population < 1 || !(elite_fraction > 0.0) || elite_fraction > 1.0) {
    throw std::invalid_argument("cem: bad population or elite fraction");
  }
  if (obj.budget() < population) {
    throw std::invalid_argument("cem: budget must cover at least one population");
  }
  Rng stream = rng.derive("cem");

  // Initial distribution: mean of D+1 random trials, variance covering the box.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dims);
  const int n_init = dims + 1;
  for (int i = 0; i < n_init && !obj.exhausted(); ++i) {
    const Eigen::VectorXd x = detail::uniform_vector(stream, dims);
    obj.evaluate(x);
    mean += x;
  }
  mean /= double(n_init);
  Eigen::VectorXd variance =
      Eigen::VectorXd::Constant(dims, settings.initial_sigma * settings.initial_sigma);

  const int n_elite = std::max(1, static_cast<int>(std::lround(population * elite_fraction)));
  std::vector<Eigen::VectorXd> gen_thetas;
  std::vector<double> gen_values;
  while (!obj.exhausted()) {
    gen_thetas.clear();
    gen_values.clear();
    for (int i = 0; i < population && !obj.exhausted(); ++i) {
      Eigen::VectorXd x(dims);
      for (int j = 0; j < dims; ++j) {
        x[j] = clamp01(mean[j] + std::sqrt(variance[j]) * stream.normal());
      }
      gen_values.push_back(obj.evaluate(x));
      gen_thetas.push_back(std::move(x));
    }
    if (static_cast<int>(gen_thetas.size()) < population) break;  // partial generation

    std::vector<int> order(gen_thetas.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + n_elite, order.end(),
                      [&](int a, int b) {
                        if (gen_values[std::size_t(a)] != gen_values[std::size_t(b)]) {
                          return gen_values[std::size_t(a)] > gen_values[std::size_t(b)];
                        }
                        return a < b;
                      });
    mean.setZero();
    for (int k = 0; k < n_elite; ++k) mean += gen_thetas[std::size_t(order[std::size_t(k)])];
    mean /= double(n_elite);
    variance.setZero();
    for (int k = 0; k < n_elite; ++k) {
      const Eigen::VectorXd diff = gen_thetas[std::size_t(order[std::size_t(k)])] - mean;
      variance += diff.cwiseProduct(diff);
    }
    variance = (variance / double(n_elite)).cwiseMax(settings.variance_floor);
  }
  return obj.records();
}

// Uniform sampling in batches until the budget runs out.
inline std::vector<TrialRecord> random_search(BudgetedObjective& obj,
                                              int population, int dims, Rng rng) {
  if (population < 1) throw std::invalid_argument("random_search: population must be >= 1");
  Rng stream = rng.derive("random");
  while (!obj.exhausted()) {
    const int batch = std::min(population, obj.remaining());
    for (int i = 0; i < batch; ++i) {
      obj.evaluate(detail::uniform_vector(stream, dims));
    }
  }
  return obj.records();
}

// Gaussian observation-noise injector emulating hardware measurement noise.
inline std::function<double(const Eigen::VectorXd&)> with_observation_noise(
    std::function<double(const Eigen::VectorXd&)> fn, double sigma, Rng rng) {
  if (sigma == 0.0) return fn;
  auto noise = std::make_shared<Rng>(rng.derive("obs.noise"));
  return [fn = std::move(fn), sigma, noise](const Eigen::VectorXd& theta) {
    return fn(theta) + sigma * noise->normal();
  };
}

}  // namespace softbo

#endif  // SOFTBO_OPTIMIZERS_HPP_
