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

#ifndef SOFTBO_ERRORS_HPP_
#define SOFTBO_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace softbo {

// Linear-algebra breakdown (e.g. a Cholesky factorization that keeps failing
// after jitter escalation). Carries a description of the offending inputs.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what)
      : std::runtime_error(what) {}
};

// The integrator produced a non-finite or runaway state.
class SimulationDiverged : public std::runtime_error {
 public:
  explicit SimulationDiverged(const std::string& what)
      : std::runtime_error(what) {}
};

// Invalid experiment configuration; message lists the offending keys.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace softbo

#endif  // SOFTBO_ERRORS_HPP_
