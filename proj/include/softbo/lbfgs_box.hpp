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
// Limited-memory quasi-Newton minimization with box constraints, realized as
// projected L-BFGS: two-loop recursion for the search direction, projection of
// the trial path onto the box, Armijo backtracking. Convergence is declared on
// the infinity norm of the projected gradient.

#ifndef SOFTBO_LBFGS_BOX_HPP_
#define SOFTBO_LBFGS_BOX_HPP_

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <limits>
#include <utility>

namespace softbo {

struct BoxLbfgsOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-6;
  int history = 8;
  int max_line_search_steps = 40;
};

struct BoxLbfgsResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

// fn(x, grad) -> double; fills grad with the gradient at x. fn may throw
// NumericalFailure at trial points; the line search treats those as +inf.
template <typename F>
BoxLbfgsResult minimize_box(F&& fn, Eigen::VectorXd x0,
                            const Eigen::VectorXd& lower,
                            const Eigen::VectorXd& upper,
                            const BoxLbfgsOptions& opts = {}) {
  const Eigen::Index n = x0.size();
  auto project = [&](Eigen::VectorXd v) {
    return v.cwiseMax(lower).cwiseMin(upper);
  };

  BoxLbfgsResult res;
  res.x = project(std::move(x0));

  Eigen::VectorXd grad(n);
  res.value = fn(res.x, grad);  // initial point must be evaluable

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> hist;  // (s, y)

  auto projected_grad_norm = [&](const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& g) {
    double norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double gi = g[i];
      if (x[i] <= lower[i] && gi > 0.0) gi = 0.0;
      if (x[i] >= upper[i] && gi < 0.0) gi = 0.0;
      norm = std::max(norm, std::abs(gi));
    }
    return norm;
  };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    if (projected_grad_norm(res.x, grad) < opts.gradient_tolerance) {
      res.converged = true;
      return res;
    }

    // Two-loop recursion.
    Eigen::VectorXd d = -grad;
    if (!hist.empty()) {
      Eigen::VectorXd q = grad;
      std::deque<double> alphas;
      for (auto it = hist.rbegin(); it != hist.rend(); ++it) {
        const double rho = 1.0 / it->second.dot(it->first);
        const double alpha = rho * it->first.dot(q);
        alphas.push_front(alpha);
        q -= alpha * it->second;
      }
      const auto& [s_last, y_last] = hist.back();
      q *= s_last.dot(y_last) / y_last.squaredNorm();
      std::size_t k = 0;
      for (auto& [s, y] : hist) {
        const double rho = 1.0 / y.dot(s);
        const double beta = rho * y.dot(q);
        q += (alphas[k++] - beta) * s;
      }
      d = -q;
    }
    if (d.dot(grad) >= 0.0) d = -grad;  // not a descent direction, reset

    // Backtracking along the projected path.
    double t = 1.0;
    const double c1 = 1e-4;
    Eigen::VectorXd x_new;
    Eigen::VectorXd grad_new(n);
    double value_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < opts.max_line_search_steps; ++ls) {
      x_new = project(res.x + t * d);
      const double predicted = grad.dot(x_new - res.x);
      if (predicted >= 0.0) {
        t *= 0.5;
        continue;
      }
      bool ok = true;
      try {
        value_new = fn(x_new, grad_new);
      } catch (const std::exception&) {
        ok = false;
      }
      if (ok && std::isfinite(value_new) &&
          value_new <= res.value + c1 * predicted) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.converged = projected_grad_norm(res.x, grad) < opts.gradient_tolerance;
      return res;
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      hist.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(hist.size()) > opts.history) hist.pop_front();
    }
    res.x = std::move(x_new);
    res.value = value_new;
    grad = std::move(grad_new);
  }
  res.iterations = opts.max_iterations;
  res.converged = projected_grad_norm(res.x, grad) < opts.gradient_tolerance;
  return res;
}

}  // namespace softbo

#endif  // SOFTBO_LBFGS_BOX_HPP_
