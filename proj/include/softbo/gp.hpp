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
// Exact Gaussian-process regression with the ARD Matern-5/2 kernel.
// Targets are standardized to zero mean / unit sample deviation before
// fitting; predictions are mapped back to objective units. Hyperparameters
// are selected by maximizing the Gamma-penalized log marginal likelihood with
// multi-start projected L-BFGS over log-parameters.

#ifndef SOFTBO_GP_HPP_
#define SOFTBO_GP_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>

#include "softbo/errors.hpp"
#include "softbo/io.hpp"
#include "softbo/kernel.hpp"
#include "softbo/lbfgs_box.hpp"
#include "softbo/math.hpp"
#include "softbo/rng.hpp"

namespace softbo {

struct TrainingSet {
  Eigen::MatrixXd inputs;        // N x D, rows in the unit box
  Eigen::VectorXd targets;       // raw objective values
  Eigen::VectorXd standardized;  // (targets - mean) / scale
  double target_mean = 0.0;
  double target_scale = 1.0;

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dims() const { return inputs.cols(); }

  static TrainingSet from(Eigen::MatrixXd inputs, Eigen::VectorXd targets) {
    if (inputs.rows() < 1 || inputs.rows() != targets.size()) {
      throw std::invalid_argument("TrainingSet: need N >= 1 rows with matching targets");
    }
    if (!inputs.allFinite() || !targets.allFinite()) {
      throw std::invalid_argument("TrainingSet: non-finite data");
    }
    if ((inputs.array() < -1e-9).any() || (inputs.array() > 1.0 + 1e-9).any()) {
      throw std::invalid_argument("TrainingSet: inputs must lie in the unit box");
    }
    TrainingSet ts;
    ts.inputs = std::move(inputs);
    ts.targets = std::move(targets);
    const Eigen::Index n = ts.targets.size();
    ts.target_mean = ts.targets.mean();
    if (n >= 2) {
      const double var =
          (ts.targets.array() - ts.target_mean).square().sum() / double(n - 1);
      const double sd = std::sqrt(var);
      ts.target_scale = sd > 1e-12 ? sd : 1.0;
    } else {
      ts.target_scale = 1.0;
    }
    ts.standardized =
        (ts.targets.array() - ts.target_mean).matrix() / ts.target_scale;
    return ts;
  }
};

// Gamma log-density penalties on the natural-space hyperparameters
// (per-dimension lengthscale, signal variance, noise variance).
struct HyperPriors {
  bool enabled = true;
  double lengthscale_shape = 3.0, lengthscale_rate = 6.0;
  double signal_shape = 2.0, signal_rate = 0.15;
  double noise_shape = 1.1, noise_rate = 0.05;

  static HyperPriors none() {
    HyperPriors p;
    p.enabled = false;
    return p;
  }

  double log_density(const KernelHyperparams& hp) const {
    if (!enabled) return 0.0;
    double v = 0.0;
    for (Eigen::Index i = 0; i < hp.lengthscales.size(); ++i) {
      v += log_gamma_pdf(hp.lengthscales[i], lengthscale_shape, lengthscale_rate);
    }
    v += log_gamma_pdf(hp.signal_variance, signal_shape, signal_rate);
    v += log_gamma_pdf(hp.noise_variance, noise_shape, noise_rate);
    return v;
  }

  // d log_density / d log(param), appended onto grad (layout matches the LML
  // gradient: [log l_1..D, log sf2, log sn2]).
  void add_gradient(const KernelHyperparams& hp, Eigen::VectorXd& grad) const {
    if (!enabled) return;
    const Eigen::Index d = hp.lengthscales.size();
    for (Eigen::Index i = 0; i < d; ++i) {
      grad[i] += (lengthscale_shape - 1.0) - lengthscale_rate * hp.lengthscales[i];
    }
    grad[d] += (signal_shape - 1.0) - signal_rate * hp.signal_variance;
    grad[d + 1] += (noise_shape - 1.0) - noise_rate * hp.noise_variance;
  }
};

// Relative diagonal jitter: base fraction of mean(diag K), escalated by 10x
// on Cholesky failure up to max_rel, after which the factorization errors out.
struct JitterPolicy {
  double rel = 1e-8;
  double max_rel = 1e-2;
};

struct PosteriorPrediction {
  double mean = 0.0;
  double variance = 0.0;  // >= 0 after clamping
};

struct LmlResult {
  double value = 0.0;
  Eigen::VectorXd gradient;  // w.r.t. [log l_1..D, log sf2, log sn2]
};

namespace detail {

struct CholFactor {
  Eigen::MatrixXd L;
  double jitter_abs = 0.0;
};

// Cholesky of K + sn2 I + jitter I with jitter escalation.
inline CholFactor robust_cholesky(const Eigen::MatrixXd& K,
                                  const KernelHyperparams& hp,
                                  const JitterPolicy& jitter) {
  const Eigen::Index n = K.rows();
  const double diag_mean = K.diagonal().mean();
  double rel = jitter.rel;
  while (true) {
    const double jitter_abs = rel * diag_mean;
    Eigen::MatrixXd A = K;
    A.diagonal().array() += hp.noise_variance + jitter_abs;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      CholFactor out;
      out.L = llt.matrixL();
      out.jitter_abs = jitter_abs;
      return out;
    }
    rel = rel > 0.0 ? rel * 10.0 : 1e-16;
    if (rel > jitter.max_rel) {
      std::string msg = "Cholesky failed after jitter escalation (N=" +
                        std::to_string(n) + ", signal_variance=" +
                        fmt_full(hp.signal_variance) + ", noise_variance=" +
                        fmt_full(hp.noise_variance) + ", lengthscales=[";
      for (Eigen::Index i = 0; i < hp.lengthscales.size(); ++i) {
        if (i) msg += ", ";
        msg += fmt_full(hp.lengthscales[i]);
      }
      msg += "])";
      throw NumericalFailure(msg);
    }
  }
}

inline LmlResult lml_impl(const PairwiseSquaredDiffs& sq,
                          const Eigen::VectorXd& y,
                          const KernelHyperparams& hp,
                          const HyperPriors& priors,
                          const JitterPolicy& jitter, bool want_gradient) {
  const Eigen::Index n = y.size();
  const Eigen::Index d = hp.lengthscales.size();

  // Accumulate scaled squared distances once; reuse for the gradient.
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < d; ++j) {
    d2 += sq.per_dim[static_cast<std::size_t>(j)] /
          (hp.lengthscales[j] * hp.lengthscales[j]);
  }
  Eigen::MatrixXd s = (5.0 * d2).cwiseSqrt();
  Eigen::MatrixXd expneg = (-s.array()).exp().matrix();
  Eigen::MatrixXd K =
      hp.signal_variance *
      ((1.0 + s.array() + (5.0 / 3.0) * d2.array()) * expneg.array()).matrix();

  const CholFactor chol = robust_cholesky(K, hp, jitter);
  const Eigen::MatrixXd& L = chol.L;
  Eigen::VectorXd alpha = L.triangularView<Eigen::Lower>().solve(y);
  const double quad = alpha.squaredNorm();
  alpha = L.transpose().triangularView<Eigen::Upper>().solve(alpha);
  const double log_det = 2.0 * L.diagonal().array().log().sum();

  LmlResult res;
  res.value = -0.5 * quad - 0.5 * log_det - 0.5 * double(n) * kLog2Pi +
              priors.log_density(hp);
  if (!want_gradient) return res;

  // grad_j = 0.5 tr((alpha alpha^T - A^{-1}) dA/dtheta_j)
  Eigen::MatrixXd Ainv = Eigen::MatrixXd::Identity(n, n);
  L.triangularView<Eigen::Lower>().solveInPlace(Ainv);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(Ainv);
  Eigen::MatrixXd B = alpha * alpha.transpose() - Ainv;

  res.gradient = Eigen::VectorXd::Zero(d + 2);
  // dK/dlog(l_j) = (5/3) sf2 (1 + s) exp(-s) .* sqdiff_j / l_j^2
  Eigen::MatrixXd E =
      ((5.0 / 3.0) * hp.signal_variance) *
      ((1.0 + s.array()) * expneg.array()).matrix();
  Eigen::MatrixXd BE = B.cwiseProduct(E);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double inv_l2 = 1.0 / (hp.lengthscales[j] * hp.lengthscales[j]);
    res.gradient[j] =
        0.5 * inv_l2 *
        BE.cwiseProduct(sq.per_dim[static_cast<std::size_t>(j)]).sum();
  }
  // dA/dlog(sf2) = K + jitter I (jitter scales with mean diag = sf2).
  res.gradient[d] = 0.5 * (B.cwiseProduct(K).sum() +
                           chol.jitter_abs * B.diagonal().sum());
  // dA/dlog(sn2) = sn2 I.
  res.gradient[d + 1] = 0.5 * hp.noise_variance * B.diagonal().sum();
  priors.add_gradient(hp, res.gradient);
  return res;
}

}  // namespace detail

// Penalized log marginal likelihood and its gradient w.r.t. log-transformed
// hyperparameters. Pass HyperPriors::none() for the bare likelihood.
inline LmlResult log_marginal_likelihood(const TrainingSet& ts,
                                         const KernelHyperparams& hp,
                                         const HyperPriors& priors = {},
                                         const JitterPolicy& jitter = {}) {
  hp.validate();
  if (hp.lengthscales.size() != ts.dims()) {
    throw std::invalid_argument("log_marginal_likelihood: lengthscale count != input dims");
  }
  const auto sq = PairwiseSquaredDiffs::from(ts.inputs);
  return detail::lml_impl(sq, ts.standardized, hp, priors, jitter, true);
}

class FittedGP {
 public:
  static FittedGP make(TrainingSet ts, KernelHyperparams hp,
                       const JitterPolicy& jitter = {}) {
    hp.validate();
    if (hp.lengthscales.size() != ts.dims()) {
      throw std::invalid_argument("FittedGP: lengthscale count != input dims");
    }
    FittedGP gp;
    gp.ts_ = std::move(ts);
    gp.hp_ = std::move(hp);
    const auto sq = PairwiseSquaredDiffs::from(gp.ts_.inputs);
    Eigen::MatrixXd K = gram_matrix(sq, gp.hp_);
    auto chol = detail::robust_cholesky(K, gp.hp_, jitter);
    gp.L_ = std::move(chol.L);
    gp.jitter_abs_ = chol.jitter_abs;
    gp.alpha_ = gp.L_.triangularView<Eigen::Lower>().solve(gp.ts_.standardized);
    gp.alpha_ =
        gp.L_.transpose().triangularView<Eigen::Upper>().solve(gp.alpha_);
    return gp;
  }

  // Posterior mean and variance at one query point, in objective units.
  PosteriorPrediction predict(const Eigen::VectorXd& query) const {
    if (!query.allFinite() || query.size() != ts_.dims()) {
      throw std::invalid_argument("predict: query must be finite with matching dims");
    }
    Eigen::VectorXd kstar(ts_.size());
    for (Eigen::Index i = 0; i < ts_.size(); ++i) {
      const double d2 = ((ts_.inputs.row(i).transpose() - query).array() /
                         hp_.lengthscales.array())
                            .square()
                            .sum();
      kstar[i] = detail::matern52_from_d2(d2, hp_.signal_variance);
    }
    PosteriorPrediction out;
    const double mean_std = kstar.dot(alpha_);
    Eigen::VectorXd v = L_.triangularView<Eigen::Lower>().solve(kstar);
    const double var_std = hp_.signal_variance - v.squaredNorm();
    out.mean = ts_.target_mean + ts_.target_scale * mean_std;
    out.variance =
        std::max(0.0, var_std) * ts_.target_scale * ts_.target_scale;
    return out;
  }

  // Batched prediction for acquisition sweeps; queries are rows of Q.
  void predict_batch(const Eigen::MatrixXd& Q, Eigen::VectorXd& means,
                     Eigen::VectorXd& variances) const {
    Eigen::MatrixXd Kstar = cross_gram(ts_.inputs, Q, hp_);  // N x M
    means = ts_.target_mean +
            ts_.target_scale * (Kstar.transpose() * alpha_).array();
    L_.triangularView<Eigen::Lower>().solveInPlace(Kstar);
    const double s2 = ts_.target_scale * ts_.target_scale;
    variances = (hp_.signal_variance - Kstar.colwise().squaredNorm().array())
                    .max(0.0)
                    .transpose() *
                s2;
  }

  const TrainingSet& training_set() const { return ts_; }
  const KernelHyperparams& hyperparams() const { return hp_; }
  const Eigen::MatrixXd& cholesky_factor() const { return L_; }
  double jitter_abs() const { return jitter_abs_; }

  // Structured-text dump (hyperparameters + training data) for inspection.
  void save_text(std::ostream& os) const {
    os << "gp.dims = " << ts_.dims() << "\n";
    os << "gp.size = " << ts_.size() << "\n";
    os << "gp.signal_variance = " << fmt_full(hp_.signal_variance) << "\n";
    os << "gp.noise_variance = " << fmt_full(hp_.noise_variance) << "\n";
    os << "gp.lengthscales =";
    for (Eigen::Index i = 0; i < hp_.lengthscales.size(); ++i) {
      os << " " << fmt_full(hp_.lengthscales[i]);
    }
    os << "\n";
    os << "gp.target_mean = " << fmt_full(ts_.target_mean) << "\n";
    os << "gp.target_scale = " << fmt_full(ts_.target_scale) << "\n";
    for (Eigen::Index i = 0; i < ts_.size(); ++i) {
      os << "gp.row =";
      for (Eigen::Index j = 0; j < ts_.dims(); ++j) {
        os << " " << fmt_full(ts_.inputs(i, j));
      }
      os << " " << fmt_full(ts_.targets[i]) << "\n";
    }
  }

 private:
  TrainingSet ts_;
  KernelHyperparams hp_;
  Eigen::MatrixXd L_;
  Eigen::VectorXd alpha_;
  double jitter_abs_ = 0.0;
};

struct FitOptions {
  HyperPriors priors{};
  JitterPolicy jitter{};
  BoxLbfgsOptions lbfgs{};
  double log_lengthscale_min = std::log(1e-3);
  double log_lengthscale_max = std::log(1e3);
  double log_signal_min = std::log(1e-6);
  double log_signal_max = std::log(1e6);
  double log_noise_min = std::log(1e-9);
  double log_noise_max = std::log(1e2);
  // Optional warm starts tried in addition to the random restarts.
  std::vector<KernelHyperparams> extra_starts;
};

// Multi-start MAP-II hyperparameter fit. Deterministic for a given
// (training set, restarts, rng state); ties go to the lowest restart index.
inline FittedGP fit(const TrainingSet& ts, int restarts, const Rng& rng,
                    const FitOptions& opts = {}) {
  if (restarts < 1) throw std::invalid_argument("fit: restarts must be >= 1");
  const Eigen::Index d = ts.dims();
  const auto sq = PairwiseSquaredDiffs::from(ts.inputs);

  Eigen::VectorXd lower(d + 2), upper(d + 2);
  lower.head(d).setConstant(opts.log_lengthscale_min);
  upper.head(d).setConstant(opts.log_lengthscale_max);
  lower[d] = opts.log_signal_min;
  upper[d] = opts.log_signal_max;
  lower[d + 1] = opts.log_noise_min;
  upper[d + 1] = opts.log_noise_max;

  auto unpack = [&](const Eigen::VectorXd& x) {
    KernelHyperparams hp;
    hp.lengthscales = x.head(d).array().exp();
    hp.signal_variance = std::exp(x[d]);
    hp.noise_variance = std::exp(x[d + 1]);
    return hp;
  };
  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    const KernelHyperparams hp = unpack(x);
    const LmlResult r =
        detail::lml_impl(sq, ts.standardized, hp, opts.priors, opts.jitter, true);
    grad = -r.gradient;
    return -r.value;
  };

  bool any_success = false;
  double best_value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x;
  std::string last_error = "no restarts attempted";

  std::vector<Eigen::VectorXd> starts;
  for (const auto& hp : opts.extra_starts) {
    Eigen::VectorXd x(d + 2);
    x.head(d) = hp.lengthscales.array().log();
    x[d] = std::log(hp.signal_variance);
    x[d + 1] = std::log(std::max(hp.noise_variance, std::exp(opts.log_noise_min)));
    starts.push_back(x.cwiseMax(lower).cwiseMin(upper));
  }
  for (int r = 0; r < restarts; ++r) {
    Rng stream = rng.derive(static_cast<std::uint64_t>(r) + 0x5f17u);
    Eigen::VectorXd x(d + 2);
    for (Eigen::Index i = 0; i < d; ++i) x[i] = std::log(stream.gamma(3.0, 6.0));
    x[d] = std::log(stream.gamma(2.0, 0.15));
    x[d + 1] = std::log(stream.gamma(1.1, 0.05));
    starts.push_back(x.cwiseMax(lower).cwiseMin(upper));
  }

  for (const auto& x0 : starts) {
    try {
      BoxLbfgsResult res = minimize_box(objective, x0, lower, upper, opts.lbfgs);
      if (std::isfinite(res.value) && res.value < best_value) {
        best_value = res.value;
        best_x = res.x;
      }
      any_success = true;
    } catch (const NumericalFailure& e) {
      last_error = e.what();
    }
  }
  if (!any_success) {
    throw NumericalFailure("fit: all restarts failed numerically: " + last_error);
  }
  return FittedGP::make(ts, unpack(best_x), opts.jitter);
}

}  // namespace softbo

#endif  // SOFTBO_GP_HPP_
