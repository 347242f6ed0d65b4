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

#ifndef SOFTBO_MATH_HPP_
#define SOFTBO_MATH_HPP_

#include <cmath>
#include <limits>

namespace softbo {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLog2Pi = 1.8378770664093454836;
inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

inline double norm_pdf(double x) {
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

inline double log_norm_pdf(double x) { return -0.5 * x * x - 0.5 * kLog2Pi; }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// Scaled complementary error function exp(x^2) erfc(x) for x >= 0.
// Direct evaluation is exact-enough up to x ~ 25; past that erfc underflows
// and the standard asymptotic series takes over.
inline double erfcx(double x) {
  if (x < 25.0) {
    return std::exp(x * x) * std::erfc(x);
  }
  const double inv2x2 = 1.0 / (2.0 * x * x);
  // 1 - 1/(2x^2) + 3/(2x^2)^2 - 15/(2x^2)^3 + 105/(2x^2)^4
  double series = 1.0 + inv2x2 * (-1.0 + inv2x2 * (3.0 + inv2x2 * (-15.0 + inv2x2 * 105.0)));
  return series / (x * std::sqrt(kPi));
}

// log Gamma(shape, rate) density at x > 0.
inline double log_gamma_pdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(x) - rate * x;
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace softbo

#endif  // SOFTBO_MATH_HPP_
