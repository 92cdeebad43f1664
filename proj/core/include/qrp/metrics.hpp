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
#include <vector>

#include "qrp/operators.hpp"

namespace qrp {

// Root mean square of the pairwise Uhlmann fidelities.
double rmsf(const std::vector<CMatrix>& targets,
            const std::vector<CMatrix>& predictions, double psd_tol = 1e-7);

// Fraction of mismatched symbols.
double ser(const std::vector<int>& true_symbols,
           const std::vector<int>& predicted_symbols);

// sqrt(mean_l [ sum (W_t - W_p)^2 / sum (W_t + W_p)^2 ]) over flattened
// phase-space grids.
double ew_error(const std::vector<Eigen::VectorXd>& target_grids,
                const std::vector<Eigen::VectorXd>& predicted_grids);

// Root-mean-square error over the first `horizon` samples, normalized by the
// standard deviation of the truth over the same window.
double nrmse(const std::vector<double>& truth, const std::vector<double>& predicted,
             int horizon);
// nrmse for every horizon 1..size.
std::vector<double> nrmse_curve(const std::vector<double>& truth,
                                const std::vector<double>& predicted);

// Longest leading horizon whose error stays <= epsilon; 0 if the first
// horizon already fails.
int vpt(const std::vector<double>& errors_by_horizon, double epsilon);

// Per-delay reconstruction quality, d = 0..d_max.
struct MemoryProfile {
  Eigen::VectorXd values;  // squared (distance) correlation per delay
  int d_max = 0;
  double capacity = 0.0;  // values.sum()
};

// For each delay d, fits a linear readout for u_{l-d} on the first 4/5 of the
// usable window (l >= d_max) and scores the squared Pearson correlation on
// the remaining 1/5.  features rows are aligned with the input steps and must
// already carry the bias column.
MemoryProfile memory_capacity_classical(const Eigen::MatrixXd& features,
                                        const std::vector<double>& u_seq,
                                        int d_max);

// Squared distance correlation between two pairwise-distance matrices via
// double centering; sequences with distance variance below 1e-12 score 0.
double distance_correlation_sq(const Eigen::MatrixXd& dist_a,
                               const Eigen::MatrixXd& dist_b);
// Same, with Bures-angle distances between the listed states.
double distance_correlation_sq(const std::vector<CMatrix>& a,
                               const std::vector<CMatrix>& b,
                               double psd_tol = 1e-7);

// Quantum analogue: per delay d, fits a tomography readout for the input
// state beta_{l-d}, reconstructs physical states on the evaluation split and
// scores the squared distance correlation against the true inputs.
MemoryProfile quantum_memory_capacity(const Eigen::MatrixXd& features,
                                      const std::vector<DensityMatrix>& input_states,
                                      int d_max);

struct AutocorrelationResult {
  Eigen::VectorXd curve;       // site-averaged autocovariance per lag
  double crossing_time = 0.0;  // first zero crossing, linearly interpolated
  bool crossed = false;        // false: no crossing, time reports trace length
};

// Mean-removed autocovariance of each site's occupation trace, averaged over
// sites (traces: rows = samples, cols = sites, spacing dt).
AutocorrelationResult autocorrelation_timescale(const Eigen::MatrixXd& traces,
                                                double dt);

}  // namespace qrp
