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
// ARD Matern-5/2 kernel:
//   k(a, b) = sf2 * (1 + sqrt(5 d2) + 5 d2 / 3) * exp(-sqrt(5 d2)),
//   d2 = sum_i (a_i - b_i)^2 / l_i^2.

#ifndef SOFTBO_KERNEL_HPP_
#define SOFTBO_KERNEL_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "softbo/io.hpp"

namespace softbo {

struct KernelHyperparams {
  Eigen::VectorXd lengthscales;  // one per input dimension, > 0
  double signal_variance = 1.0;  // sf2 > 0
  double noise_variance = 0.0;   // sn2 >= 0

  void validate() const {
    if (lengthscales.size() == 0 || !(lengthscales.array() > 0.0).all() ||
        !lengthscales.allFinite()) {
      throw std::invalid_argument("KernelHyperparams: lengthscales must be positive and finite");
    }
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
      throw std::invalid_argument("KernelHyperparams: signal_variance must be positive");
    }
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
      throw std::invalid_argument("KernelHyperparams: noise_variance must be non-negative");
    }
  }

  static KernelHyperparams unit(int dims) {
    KernelHyperparams hp;
    hp.lengthscales = Eigen::VectorXd::Ones(dims);
    return hp;
  }

  // Lossless one-line text form.
  std::string to_text() const {
    std::string out = fmt_full(signal_variance) + " " + fmt_full(noise_variance);
    for (Eigen::Index i = 0; i < lengthscales.size(); ++i) {
      out += " " + fmt_full(lengthscales[i]);
    }
    return out;
  }

  static KernelHyperparams from_text(const std::string& text) {
    const auto fields = split(text, ' ');
    if (fields.size() < 3) {
      throw std::invalid_argument("KernelHyperparams: malformed text form");
    }
    KernelHyperparams hp;
    hp.signal_variance = std::strtod(fields[0].c_str(), nullptr);
    hp.noise_variance = std::strtod(fields[1].c_str(), nullptr);
    hp.lengthscales.resize(static_cast<Eigen::Index>(fields.size()) - 2);
    for (std::size_t i = 2; i < fields.size(); ++i) {
      hp.lengthscales[static_cast<Eigen::Index>(i - 2)] =
          std::strtod(fields[i].c_str(), nullptr);
    }
    hp.validate();
    return hp;
  }
};

namespace detail {

inline double matern52_from_d2(double d2, double sf2) {
  const double s = std::sqrt(5.0 * d2);
  return sf2 * (1.0 + s + 5.0 * d2 / 3.0) * std::exp(-s);
}

}  // namespace detail

inline double matern52_ard(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                           const KernelHyperparams& hp) {
  if (!a.allFinite() || !b.allFinite()) {
    throw std::invalid_argument("matern52_ard: non-finite input");
  }
  if (a.size() != b.size() || a.size() != hp.lengthscales.size()) {
    throw std::invalid_argument("matern52_ard: dimension mismatch");
  }
  hp.validate();
  const double d2 =
      ((a - b).array() / hp.lengthscales.array()).square().sum();
  return detail::matern52_from_d2(d2, hp.signal_variance);
}

// Pairwise per-dimension squared differences of the rows of X, cached so the
// marginal-likelihood optimizer does not recompute them per step.
struct PairwiseSquaredDiffs {
  std::vector<Eigen::MatrixXd> per_dim;  // D matrices, each N x N

  static PairwiseSquaredDiffs from(const Eigen::MatrixXd& X) {
    PairwiseSquaredDiffs out;
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    out.per_dim.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
      Eigen::MatrixXd diff =
          X.col(j).replicate(1, n) - X.col(j).transpose().replicate(n, 1);
      out.per_dim.push_back(diff.array().square().matrix());
    }
    return out;
  }
};

// Gram matrix K(X, X) (no noise, no jitter).
inline Eigen::MatrixXd gram_matrix(const PairwiseSquaredDiffs& sq,
                                   const KernelHyperparams& hp) {
  const Eigen::Index n = sq.per_dim.empty() ? 0 : sq.per_dim[0].rows();
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < sq.per_dim.size(); ++j) {
    const double inv_l2 = 1.0 / (hp.lengthscales[static_cast<Eigen::Index>(j)] *
                                 hp.lengthscales[static_cast<Eigen::Index>(j)]);
    d2 += inv_l2 * sq.per_dim[j];
  }
  Eigen::MatrixXd s = (5.0 * d2).cwiseSqrt();
  return hp.signal_variance *
         ((1.0 + s.array() + (5.0 / 3.0) * d2.array()) * (-s.array()).exp())
             .matrix();
}

// Cross-covariance K(X, Q): N x M for N training rows and M query rows.
inline Eigen::MatrixXd cross_gram(const Eigen::MatrixXd& X,
                                  const Eigen::MatrixXd& Q,
                                  const KernelHyperparams& hp) {
  const Eigen::Index n = X.rows();
  const Eigen::Index m = Q.rows();
  Eigen::MatrixXd d2 = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double inv_l = 1.0 / hp.lengthscales[j];
    Eigen::MatrixXd diff = (X.col(j) * inv_l).replicate(1, m) -
                           (Q.col(j) * inv_l).transpose().replicate(n, 1);
    d2 += diff.array().square().matrix();
  }
  Eigen::MatrixXd s = (5.0 * d2).cwiseSqrt();
  return hp.signal_variance *
         ((1.0 + s.array() + (5.0 / 3.0) * d2.array()) * (-s.array()).exp())
             .matrix();
}

}  // namespace softbo

#endif  // SOFTBO_KERNEL_HPP_
