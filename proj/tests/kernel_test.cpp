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

#include "softbo/kernel.hpp"

#include <gtest/gtest.h>

#include <Eigen/Cholesky>
#include <cmath>

#include "softbo/rng.hpp"

namespace softbo {
namespace {

Eigen::VectorXd vec1(double a) {
  Eigen::VectorXd v(1);
  v << a;
  return v;
}

TEST(Matern52, ZeroDistanceGivesSignalVariance) {
  KernelHyperparams hp = KernelHyperparams::unit(3);
  hp.signal_variance = 1.0;
  Eigen::VectorXd a(3);
  a << 0.2, 0.5, 0.9;
  EXPECT_DOUBLE_EQ(matern52_ard(a, a, hp), 1.0);

  hp.signal_variance = 3.7;
  EXPECT_DOUBLE_EQ(matern52_ard(a, a, hp), 3.7);
}

TEST(Matern52, UnitDistanceReferenceValue) {
  // (1 + sqrt(5) + 5/3) exp(-sqrt(5)), high-precision reference.
  KernelHyperparams hp = KernelHyperparams::unit(1);
  const double k = matern52_ard(vec1(0.0), vec1(1.0), hp);
  EXPECT_NEAR(k, 0.52399410883182031, 1e-15);
}

TEST(Matern52, IrrelevantDimensionLimit) {
  KernelHyperparams hp = KernelHyperparams::unit(2);
  hp.lengthscales << 1.0, 1e8;
  Eigen::VectorXd a(2), b(2);
  a << 0.0, 0.0;
  b << 1.0, 1.0;
  EXPECT_NEAR(matern52_ard(a, b, hp), 0.52399410883182031, 1e-6);
}

TEST(Matern52, SymmetricAndBounded) {
  Rng rng(7);
  KernelHyperparams hp = KernelHyperparams::unit(4);
  hp.lengthscales << 0.3, 1.2, 0.05, 10.0;
  hp.signal_variance = 2.5;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = rng.uniform();
      b[i] = rng.uniform();
    }
    const double kab = matern52_ard(a, b, hp);
    const double kba = matern52_ard(b, a, hp);
    EXPECT_EQ(kab, kba);
    EXPECT_LE(kab, hp.signal_variance);
    EXPECT_GT(kab, 0.0);
  }
}

TEST(Matern52, RejectsNonFiniteInput) {
  KernelHyperparams hp = KernelHyperparams::unit(1);
  Eigen::VectorXd bad(1);
  bad << std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(matern52_ard(bad, vec1(0.0), hp), std::invalid_argument);
  EXPECT_THROW(matern52_ard(vec1(0.0), bad, hp), std::invalid_argument);
}

TEST(KernelHyperparams, ValidationRejectsBadValues) {
  KernelHyperparams hp = KernelHyperparams::unit(2);
  hp.lengthscales[0] = -1.0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = KernelHyperparams::unit(2);
  hp.signal_variance = 0.0;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
  hp = KernelHyperparams::unit(2);
  hp.noise_variance = -1e-3;
  EXPECT_THROW(hp.validate(), std::invalid_argument);
}

TEST(GramMatrix, PositiveSemidefiniteWithJitter) {
  Rng rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + int(rng.uniform() * 11);  // N <= 12
    const int d = 1 + int(rng.uniform() * 5);
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = rng.uniform();
    }
    KernelHyperparams hp = KernelHyperparams::unit(d);
    for (int j = 0; j < d; ++j) hp.lengthscales[j] = 0.05 + rng.uniform();
    hp.signal_variance = 0.1 + 3.0 * rng.uniform();

    Eigen::MatrixXd K = gram_matrix(PairwiseSquaredDiffs::from(X), hp);
    K.diagonal().array() += 1e-8;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    EXPECT_EQ(llt.info(), Eigen::Success) << "trial " << trial;
  }
}

TEST(GramMatrix, MatchesPairwiseKernel) {
  Rng rng(5);
  const int n = 6, d = 3;
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) X(i, j) = rng.uniform();
  }
  KernelHyperparams hp = KernelHyperparams::unit(d);
  hp.lengthscales << 0.4, 1.1, 0.7;
  hp.signal_variance = 1.9;
  const Eigen::MatrixXd K = gram_matrix(PairwiseSquaredDiffs::from(X), hp);
  const Eigen::MatrixXd C = cross_gram(X, X, hp);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double direct = matern52_ard(X.row(i), X.row(j), hp);
      EXPECT_NEAR(K(i, j), direct, 1e-12);
      EXPECT_NEAR(C(i, j), direct, 1e-12);
    }
  }
}

}  // namespace
}  // namespace softbo
