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
// UCB and log-domain expected improvement over a GP posterior, plus a
// derivative-free maximizer over the unit box (seeded candidate sweep
// followed by compass-search refinement of the best candidates).

#ifndef SOFTBO_ACQUISITION_HPP_
#define SOFTBO_ACQUISITION_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "softbo/gp.hpp"
#include "softbo/math.hpp"
#include "softbo/rng.hpp"

namespace softbo {

enum class AcquisitionKind { kUcb, kLogEi };

struct AcquisitionConfig {
  AcquisitionKind kind = AcquisitionKind::kLogEi;
  double kappa = 0.9;                    // UCB exploration weight
  double incumbent = kNegInf;            // best observed objective (LogEI)
  int candidate_count = 512;
  int refine_count = 10;
  int refine_steps = 50;

  void validate() const {
    if (candidate_count < 1 || refine_count < 1 || refine_steps < 1 ||
        candidate_count < refine_count) {
      throw std::invalid_argument(
          "AcquisitionConfig: need candidate_count >= refine_count >= 1 and refine_steps >= 1");
    }
    if (kind == AcquisitionKind::kUcb && !(kappa >= 0.0)) {
      throw std::invalid_argument("AcquisitionConfig: kappa must be >= 0");
    }
  }
};

inline double ucb(const PosteriorPrediction& pred, double kappa) {
  if (!(kappa >= 0.0)) {
    throw std::invalid_argument("ucb: kappa must be >= 0");
  }
  return pred.mean + std::sqrt(kappa) * std::sqrt(std::max(0.0, pred.variance));
}

namespace detail {

// log(v Phi(v) + phi(v)), the log of the standardized EI factor. Direct
// evaluation is safe down to v = -6; past that phi underflows and the erfcx
// route takes over, with the Mills-ratio series as the deep-tail fallback.
inline double log_ei_factor(double v) {
  if (std::isinf(v) && v > 0.0) return v;  // caller handles the linear term
  if (v >= -6.0) {
    const double h = v * norm_cdf(v) + norm_pdf(v);
    return std::log(h);
  }
  const double av = -v;
  if (av < 1e6) {
    // h(v) = phi(v) (1 - |v| sqrt(pi/2) erfcx(|v|/sqrt(2)))
    const double c = av * std::sqrt(kPi / 2.0) * erfcx(av / kSqrt2);
    const double rem = 1.0 - c;
    if (rem > 0.0) return log_norm_pdf(v) + std::log(rem);
  }
  // Mills expansion: h(v)/phi(v) = 1/v^2 - 3/v^4 + 15/v^6 - ...
  const double iv2 = 1.0 / (v * v);
  return log_norm_pdf(v) + std::log(iv2 * (1.0 - iv2 * (3.0 - 15.0 * iv2)));
}

}  // namespace detail

// Log of EI(theta) = sigma [u Phi(u) + phi(u)], u = (mu - incumbent) / sigma,
// valid far into the no-improvement regime. sigma = 0 degenerates to
// log(max(mu - incumbent, 0)) with log 0 = -inf.
inline double log_ei(const PosteriorPrediction& pred, double incumbent) {
  const double sigma = std::sqrt(std::max(0.0, pred.variance));
  const double diff = pred.mean - incumbent;
  if (sigma == 0.0) {
    return diff > 0.0 ? std::log(diff) : kNegInf;
  }
  const double v = diff / sigma;
  if (std::isinf(v) && v > 0.0) return std::log(diff);
  return std::log(sigma) + detail::log_ei_factor(v);
}

namespace detail {

inline double acquisition_value(const AcquisitionConfig& cfg, double mean,
                                double variance) {
  PosteriorPrediction p{mean, variance};
  return cfg.kind == AcquisitionKind::kUcb ? ucb(p, cfg.kappa)
                                           : log_ei(p, cfg.incumbent);
}

}  // namespace detail

// Argmax estimate of the acquisition over [0,1]^D. Deterministic for a given
// rng state; ties break toward the lowest candidate index.
inline Eigen::VectorXd maximize(const FittedGP& gp, const AcquisitionConfig& cfg,
                                Rng rng) {
  cfg.validate();
  const Eigen::Index d = gp.training_set().dims();
  const int n_cand = cfg.candidate_count;

  Eigen::MatrixXd cands(n_cand, d);
  for (int i = 0; i < n_cand; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) cands(i, j) = rng.uniform();
  }
  Eigen::VectorXd means, vars;
  gp.predict_batch(cands, means, vars);
  Eigen::VectorXd values(n_cand);
  for (int i = 0; i < n_cand; ++i) {
    values[i] = detail::acquisition_value(cfg, means[i], vars[i]);
  }

  // refine_count best candidates, ties to the lowest index.
  std::vector<int> order(static_cast<std::size_t>(n_cand));
  std::iota(order.begin(), order.end(), 0);
  const int n_ref = std::min(cfg.refine_count, n_cand);
  std::partial_sort(order.begin(), order.begin() + n_ref, order.end(),
                    [&](int a, int b) {
                      if (values[a] != values[b]) return values[a] > values[b];
                      return a < b;
                    });

  struct Point {
    Eigen::VectorXd x;
    double value;
    double step;
  };
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(n_ref));
  for (int k = 0; k < n_ref; ++k) {
    pts.push_back({cands.row(order[std::size_t(k)]).transpose(),
                   values[order[std::size_t(k)]], 0.25});
  }

  const double min_step = 1e-4;  // well below the grid-oracle tolerance
  Eigen::MatrixXd probes(2 * d * n_ref, d);
  Eigen::VectorXd pmeans, pvars;
  for (int it = 0; it < cfg.refine_steps; ++it) {
    bool any_active = false;
    for (const auto& p : pts) any_active |= p.step >= min_step;
    if (!any_active) break;

    for (int k = 0; k < n_ref; ++k) {
      for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::VectorXd up = pts[std::size_t(k)].x;
        Eigen::VectorXd down = pts[std::size_t(k)].x;
        up[j] = std::min(1.0, up[j] + pts[std::size_t(k)].step);
        down[j] = std::max(0.0, down[j] - pts[std::size_t(k)].step);
        probes.row(2 * (k * d + j)) = up.transpose();
        probes.row(2 * (k * d + j) + 1) = down.transpose();
      }
    }
    gp.predict_batch(probes, pmeans, pvars);
    for (int k = 0; k < n_ref; ++k) {
      auto& p = pts[std::size_t(k)];
      if (p.step < min_step) continue;
      double best_val = p.value;
      int best_row = -1;
      for (Eigen::Index j = 0; j < 2 * d; ++j) {
        const Eigen::Index row = 2 * k * d + j;
        const double val = detail::acquisition_value(cfg, pmeans[row], pvars[row]);
        if (val > best_val) {
          best_val = val;
          best_row = static_cast<int>(row);
        }
      }
      if (best_row >= 0) {
        p.x = probes.row(best_row).transpose();
        p.value = best_val;
      } else {
        p.step *= 0.5;
      }
    }
  }

  int best = 0;
  for (int k = 1; k < n_ref; ++k) {
    if (pts[std::size_t(k)].value > pts[std::size_t(best)].value) best = k;
  }
  return pts[std::size_t(best)].x;
}

}  // namespace softbo

#endif  // SOFTBO_ACQUISITION_HPP_
