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
#include <cstddef>
#include <vector>

#include "qrp/operators.hpp"

namespace qrp {

// One reservoir run worth of paired classical/quantum inputs plus whichever
// target representation the generating task uses.  Unused target vectors stay
// empty; populated ones are aligned index-for-index with u.
struct HybridSequence {
  std::vector<double> u;            // classical inputs, one per step
  std::vector<DensityMatrix> beta;  // quantum inputs on the input-mode space

  std::vector<DensityMatrix> target_states;
  std::vector<Eigen::VectorXd> target_wigner;  // flattened grids, x-major
  std::vector<int> target_symbols;
  std::vector<double> target_values;

  // Task delays: generic delay d, classical-control delay d_c, quantum-input
  // delay d_q.  Zero when the task has no delayed component.
  int d = 0;
  int d_c = 0;
  int d_q = 0;

  std::size_t size() const { return u.size(); }
};

}  // namespace qrp
