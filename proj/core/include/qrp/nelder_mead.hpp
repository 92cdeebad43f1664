// Copyright 2026 The qrproc Authors
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

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace qrp {

struct NelderMeadOptions {
  int max_iters = 1000;
  double tolerance = 1e-6;  // simplex infinity-norm diameter
  double initial_step = 0.1;
  // Per-coordinate simplex offsets; overrides initial_step when non-empty.
  Eigen::VectorXd initial_steps;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  std::vector<double> best_history;  // best value after each iteration
  int iterations = 0;
  bool converged = false;
};

// Downhill simplex with reflection 1, expansion 2, contraction 0.5 and
// shrink 0.5, terminating when the simplex diameter (infinity norm around the
// best vertex) falls below tolerance or max_iters is reached.  The best value
// never increases between iterations.  Throws std::runtime_error if the cost
// returns a non-finite value, quoting the offending point.
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& cost,
    const Eigen::VectorXd& x0, const NelderMeadOptions& opts);

}  // namespace qrp
