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

#include "qrp/operators.hpp"

namespace qrp {

// Phase-space quasi-probability samples with convention integral W dx dp = 1,
// x = (a + a^dag)/sqrt(2).  values(i, j) = W(x_points[i], p_points[j]).
struct WignerGrid {
  Eigen::VectorXd x_points;
  Eigen::VectorXd p_points;
  Eigen::MatrixXd values;
};

// n evenly spaced points with both endpoints exact.
Eigen::VectorXd linspace(double lo, double hi, int n);

// Precomputed Fock-basis evaluation kernel: W over the grid equals
// Re(B * vec(rho)) with vec in row-major order.  Build once per (dim, grid)
// and reuse for many states; cost per state is one dense mat-vec.
class WignerBasis {
 public:
  WignerBasis(int dim, Eigen::VectorXd x_points, Eigen::VectorXd p_points);

  // 61 x 61 grid covering [-3, 3] on both axes.
  static WignerBasis standard(int dim);

  int dim() const { return dim_; }
  const Eigen::VectorXd& x_points() const { return x_points_; }
  const Eigen::VectorXd& p_points() const { return p_points_; }
  int grid_size() const {
    return static_cast<int>(x_points_.size() * p_points_.size());
  }

  // Flat values, x-major: entry i * p_points.size() + j is W(x_i, p_j).
  Eigen::VectorXd evaluate_flat(const CMatrix& rho) const;
  WignerGrid evaluate(const CMatrix& rho) const;

 private:
  int dim_ = 0;
  Eigen::VectorXd x_points_;
  Eigen::VectorXd p_points_;
  CMatrix bmat_;
};

// Single phase-space point via the same displaced-parity kernel.
double wigner_point(const CMatrix& rho, double x, double p);

// Full-grid evaluation of a single-mode state; throws std::invalid_argument
// on multi-mode input.
WignerGrid wigner(const DensityMatrix& rho, const Eigen::VectorXd& x_points,
                  const Eigen::VectorXd& p_points);
WignerGrid wigner(const DensityMatrix& rho);

}  // namespace qrp
