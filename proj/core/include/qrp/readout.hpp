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
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "qrp/operators.hpp"
#include "qrp/reservoir.hpp"

namespace qrp {

// Linear readout y = x W_out for feature rows x that already carry the bias
// column, so the bias weights are the last row of W_out.
struct ReadoutWeights {
  Eigen::MatrixXd W_out;  // (K+1) x d
  double eta = 0.0;       // regularizer used during the fit

  Eigen::VectorXd apply(const Eigen::VectorXd& features_with_bias) const {
    return W_out.transpose() * features_with_bias;
  }
  Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& x) const {
    return x * W_out;
  }
};

// Scale-aware default regularizer 1e-6 trace(X^T X)/K with K = cols - 1
// (bias column excluded from the count).
double default_ridge_eta(const Eigen::MatrixXd& x);

// Minimizer of |X w - Y|^2 + eta |w|^2 via an LDLT solve of the normal
// equations; throws std::runtime_error when the system is singular and
// eta == 0 (the residual check fails).
ReadoutWeights ridge_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                         double eta);

// [all real entries row-major, then all imaginary entries row-major].
Eigen::VectorXd vectorize_density(const CMatrix& m);

// Unstack a 2 D^2 real vector, Hermitize, and project onto the set of valid
// density matrices.
DensityMatrix reconstruct_density(const Eigen::VectorXd& y, int D);

// Nearest symbol in {-3, -1, 1, 3}; ties break toward the smaller symbol.
int quantize_symbol(double y);

struct ClosedLoopOptions {
  int steps = 0;
  double initial_u = 0.0;      // first fed control value
  double divergence_guard = 10.0;

  // Optional single-step interventions applied to the fed-back control.
  std::optional<int> intervention_step;
  double perturbation = 0.0;                  // added at intervention_step
  std::optional<double> override_value;       // replaces instead of adds
};

struct ClosedLoopResult {
  std::vector<double> u_fed;        // control actually applied at each step
  std::vector<double> predictions;  // readout outputs (next-step estimates)
  Eigen::MatrixXd tomography;       // steps x d_tomo (0 x 0 without a head)
};

// Feeds the predictor output back as the next control input while injecting
// fresh quantum inputs from beta_source.  The simulator enters with its
// trained-run state (no re-warmup).  Throws std::runtime_error when a
// prediction magnitude exceeds divergence_guard.
ClosedLoopResult closed_loop_generate(
    ReservoirSimulator& sim, const ReadoutWeights& predictor,
    const ReadoutWeights* tomography_head,
    const std::function<DensityMatrix(int)>& beta_source,
    const ClosedLoopOptions& opts);

struct EsnConfig {
  int nodes = 16;
  double connection_probability = 0.1;
  double spectral_radius = 0.9;
  double input_scale = 1.0;
  std::uint64_t seed = 0;
};

// Echo state network x_{l+1} = tanh(W_in u_{l+1} + W x_l) from x_0 = 0; the
// recurrent matrix is rescaled to the requested spectral radius after
// sampling.  Row l holds the state after consuming u_seq[l] plus a bias 1.
FeatureMatrix esn_run(const EsnConfig& cfg, const std::vector<double>& u_seq);

}  // namespace qrp
