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

#include "softbo/gp.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "softbo/rng.hpp"

namespace softbo {
namespace {

TrainingSet random_training_set(Rng& rng, int n, int d) {
  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) X(i, j) = rng.uniform();
    y[i] = 4.0 * rng.uniform() - 2.0;
  }
  return TrainingSet::from(std::move(X), std::move(y));
}

KernelHyperparams random_hyperparams(Rng& rng, int d) {
  KernelHyperparams hp = KernelHyperparams::unit(d);
  for (int j = 0; j < d; ++j) hp.lengthscales[j] = 0.2 + 1.5 * rng.uniform();
  hp.signal_variance = 0.3 + 2.0 * rng.uniform();
  hp.noise_variance = 0.01 + 0.2 * rng.uniform();
  return hp;
}

TEST(TrainingSet, StandardizesTargets) {
  Rng rng(11);
  const auto ts = random_training_set(rng, 8, 2);
  EXPECT_NEAR(ts.standardized.mean(), 0.0, 1e-12);
  const double sd = std::sqrt(ts.standardized.squaredNorm() / 7.0);
  EXPECT_NEAR(sd, 1.0, 1e-12);
  // round trip
  for (int i = 0; i < 8; ++i) {
    EXPECT_NEAR(ts.target_mean + ts.target_scale * ts.standardized[i],
                ts.targets[i], 1e-12);
  }
}

TEST(TrainingSet, RejectsBadData) {
  Eigen::MatrixXd X(2, 1);
  X << 0.1, 0.8;
  Eigen::VectorXd y(2);
  y << 1.0, std::numeric_limits<double>::infinity();
  EXPECT_THROW(TrainingSet::from(X, y), std::invalid_argument);
  y << 1.0, 2.0;
  X(0, 0) = 1.5;  // outside the unit box
  EXPECT_THROW(TrainingSet::from(X, y), std::invalid_argument);
  EXPECT_THROW(TrainingSet::from(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0)),
               std::invalid_argument);
}

TEST(LogMarginalLikelihood, SingleZeroTarget) {
  Eigen::MatrixXd X(1, 1);
  X << 0.5;
  Eigen::VectorXd y(1);
  y << 0.0;
  auto ts = TrainingSet::from(X, y);
  KernelHyperparams hp = KernelHyperparams::unit(1);
  hp.noise_variance = 0.0;
  JitterPolicy tiny;
  tiny.rel = 1e-300;
  const auto res = log_marginal_likelihood(ts, hp, HyperPriors::none(), tiny);
  EXPECT_NEAR(res.value, -0.91893853320467274, 1e-12);
}

TEST(LogMarginalLikelihood, MatchesDenseOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    const int d = 1 + int(rng.uniform() * 3);
    const auto ts = random_training_set(rng, n, d);
    const auto hp = random_hyperparams(rng, d);
    JitterPolicy jitter;
    const auto res = log_marginal_likelihood(ts, hp, HyperPriors::none(), jitter);
    const double expected =
        oracle::dense_lml(ts, hp, jitter.rel * hp.signal_variance);
    EXPECT_NEAR(res.value, expected, 1e-10) << "trial " << trial;
  }
}

TEST(LogMarginalLikelihood, GradientMatchesCentralDifferences) {
  Rng rng(31);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + int(rng.uniform() * 6);
    const int d = 1 + int(rng.uniform() * 4);
    const auto ts = random_training_set(rng, n, d);
    const auto hp = random_hyperparams(rng, d);
    const HyperPriors priors =
        (trial % 2 == 0) ? HyperPriors{} : HyperPriors::none();

    Eigen::VectorXd log_params(d + 2);
    log_params.head(d) = hp.lengthscales.array().log();
    log_params[d] = std::log(hp.signal_variance);
    log_params[d + 1] = std::log(hp.noise_variance);

    auto value_at = [&](const Eigen::VectorXd& lp) {
      KernelHyperparams h2 = hp;
      h2.lengthscales = lp.head(d).array().exp();
      h2.signal_variance = std::exp(lp[d]);
      h2.noise_variance = std::exp(lp[d + 1]);
      return log_marginal_likelihood(ts, h2, priors).value;
    };

    const auto res = log_marginal_likelihood(ts, hp, priors);
    const Eigen::VectorXd fd = oracle::central_differences(value_at, log_params, h);
    for (int j = 0; j < d + 2; ++j) {
      const double denom = std::max(1e-8, std::abs(fd[j]));
      EXPECT_LT(std::abs(res.gradient[j] - fd[j]) / denom, 1e-5)
          << "trial " << trial << " param " << j;
    }
  }
}

TEST(FittedGP, CholeskyReconstructsGram) {
  Rng rng(41);
  const auto ts = random_training_set(rng, 9, 3);
  const auto hp = random_hyperparams(rng, 3);
  const auto gp = FittedGP::make(ts, hp);
  Eigen::MatrixXd A =
      gram_matrix(PairwiseSquaredDiffs::from(ts.inputs), hp);
  A.diagonal().array() += hp.noise_variance + gp.jitter_abs();
  const Eigen::MatrixXd recon =
      gp.cholesky_factor() * gp.cholesky_factor().transpose();
  EXPECT_LT((recon - A).norm() / A.norm(), 1e-8);
}

TEST(FittedGP, NoiselessInterpolation) {
  Eigen::MatrixXd X(5, 1);
  X << 0.1, 0.3, 0.5, 0.7, 0.9;
  Eigen::VectorXd y = X.col(0).array().square();
  auto ts = TrainingSet::from(X, y);
  KernelHyperparams hp = KernelHyperparams::unit(1);
  hp.lengthscales[0] = 0.4;
  hp.noise_variance = 0.0;
  JitterPolicy jitter;
  jitter.rel = 1e-10;
  const auto gp = FittedGP::make(ts, hp, jitter);
  for (int i = 0; i < 5; ++i) {
    const auto pred = gp.predict(X.row(i).transpose());
    EXPECT_NEAR(pred.mean, y[i], 1e-6);
    EXPECT_LT(pred.variance, 1e-6);
    EXPECT_GE(pred.variance, 0.0);
  }
}

TEST(FittedGP, MatchesDenseOracle) {
  Rng rng(51);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + int(rng.uniform() * 9);  // N <= 10
    const int d = 1 + int(rng.uniform() * 5);
    const auto ts = random_training_set(rng, n, d);
    const auto hp = random_hyperparams(rng, d);
    const auto gp = FittedGP::make(ts, hp);
    for (int k = 0; k < 4; ++k) {
      Eigen::VectorXd q(d);
      for (int j = 0; j < d; ++j) q[j] = rng.uniform();
      const auto pred = gp.predict(q);
      const auto [mean, var] =
          oracle::dense_gp_predict(ts, hp, gp.jitter_abs(), q);
      EXPECT_NEAR(pred.mean, mean, 1e-8);
      EXPECT_NEAR(pred.variance, var, 1e-8);
    }
  }
}

TEST(FittedGP, BatchPredictionMatchesSingle) {
  Rng rng(61);
  const auto ts = random_training_set(rng, 12, 3);
  const auto hp = random_hyperparams(rng, 3);
  const auto gp = FittedGP::make(ts, hp);
  Eigen::MatrixXd Q(7, 3);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 3; ++j) Q(i, j) = rng.uniform();
  }
  Eigen::VectorXd means, vars;
  gp.predict_batch(Q, means, vars);
  for (int i = 0; i < 7; ++i) {
    const auto pred = gp.predict(Q.row(i).transpose());
    EXPECT_NEAR(means[i], pred.mean, 1e-11);
    EXPECT_NEAR(vars[i], pred.variance, 1e-11);
  }
}

TEST(FittedGP, PriorReversionFarFromData) {
  Eigen::MatrixXd X(4, 1);
  X << 0.0, 0.01, 0.02, 0.03;
  Eigen::VectorXd y(4);
  y << 1.0, 2.0, 0.5, 1.5;
  auto ts = TrainingSet::from(X, y);
  KernelHyperparams hp = KernelHyperparams::unit(1);
  hp.lengthscales[0] = 0.02;
  hp.signal_variance = 1.7;
  hp.noise_variance = 0.1;
  const auto gp = FittedGP::make(ts, hp);
  Eigen::VectorXd q(1);
  q << 1.0;  // 50 lengthscales away
  const auto pred = gp.predict(q);
  EXPECT_NEAR(pred.mean, ts.target_mean, 1e-4);
  const double scale2 = ts.target_scale * ts.target_scale;
  EXPECT_NEAR(pred.variance, hp.signal_variance * scale2, 1e-4 * scale2);
}

TEST(FittedGP, ConstantTargetsRoundTrip) {
  Eigen::MatrixXd X(5, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 3.25);
  Rng rng(71);
  for (int i = 0; i < 5; ++i) {
    X(i, 0) = rng.uniform();
    X(i, 1) = rng.uniform();
  }
  const auto gp = FittedGP::make(TrainingSet::from(X, y),
                                 KernelHyperparams::unit(2));
  Eigen::VectorXd q(2);
  q << 0.42, 0.58;
  EXPECT_NEAR(gp.predict(q).mean, 3.25, 1e-10);
}

TEST(Fit, RecoversNoiselessQuadratic) {
  Eigen::MatrixXd X(6, 1);
  X << 0.0, 0.2, 0.4, 0.6, 0.8, 1.0;
  Eigen::VectorXd y = X.col(0).array().square();
  auto ts = TrainingSet::from(X, y);

  // With the default Gamma noise prior the MAP noise settles near 4e-4,
  // which caps training-point reproduction around 2e-3 on this dataset.
  const auto gp = fit(ts, 8, Rng(0));
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(gp.predict(X.row(i).transpose()).mean, y[i], 2e-3);
  }

  // The unpenalized fit drives the noise to its bound and interpolates.
  FitOptions opts;
  opts.priors = HyperPriors::none();
  const auto ml = fit(ts, 8, Rng(0), opts);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(ml.predict(X.row(i).transpose()).mean, y[i], 1e-4);
  }
}

TEST(Fit, DeterministicForSameSeed) {
  Rng data_rng(81);
  const auto ts = random_training_set(data_rng, 10, 2);
  const auto a = fit(ts, 4, Rng(1234));
  const auto b = fit(ts, 4, Rng(1234));
  EXPECT_EQ(a.hyperparams().signal_variance, b.hyperparams().signal_variance);
  EXPECT_EQ(a.hyperparams().noise_variance, b.hyperparams().noise_variance);
  for (int j = 0; j < 2; ++j) {
    EXPECT_EQ(a.hyperparams().lengthscales[j], b.hyperparams().lengthscales[j]);
  }
}

TEST(Fit, MoreRestartsNeverWorse) {
  // Rough target: fast oscillation sampled sparsely.
  Eigen::MatrixXd X(12, 1);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) {
    X(i, 0) = i / 11.0;
    y[i] = std::sin(40.0 * X(i, 0)) + 0.3 * std::sin(9.0 * X(i, 0));
  }
  const auto ts = TrainingSet::from(X, y);
  const auto gp1 = fit(ts, 1, Rng(7));
  const auto gp16 = fit(ts, 16, Rng(7));
  const double lml1 = log_marginal_likelihood(ts, gp1.hyperparams()).value;
  const double lml16 = log_marginal_likelihood(ts, gp16.hyperparams()).value;
  EXPECT_GE(lml16, lml1 - 1e-9);
}

TEST(KernelHyperparamsText, RoundTripsLosslessly) {
  Rng rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    auto hp = random_hyperparams(rng, 3);
    const auto back = KernelHyperparams::from_text(hp.to_text());
    EXPECT_EQ(back.signal_variance, hp.signal_variance);
    EXPECT_EQ(back.noise_variance, hp.noise_variance);
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(back.lengthscales[j], hp.lengthscales[j]);
    }
  }
}

}  // namespace
}  // namespace softbo
