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
#include "qrp/reservoir.hpp"
#include "qrp/sequence.hpp"

namespace qrp {

// Which physical modes feed the trainable output mixer.
enum class ModeSet { kIn, kRv, kAll };

enum class Trainable { kWo, kWio };
enum class CostKind { kEf, kEw };

// Linear-optical readout: M output modes C_m = sum_j o_mj c_j over the N_R
// selected modes, with the coefficient rows o taken from the first M rows of
// exp(i G(theta)).  G is Hermitian: theta holds the N_R diagonal entries
// followed by (real, imag) pairs for the strict upper triangle in row-major
// order, N_R^2 parameters in total.
struct ModeMixer {
  Eigen::VectorXd theta;
  int M = 1;
  int N_R = 1;
  ModeSet mode_set = ModeSet::kAll;
};

// Hermitian matrix G(theta); theta must have n^2 entries.
CMatrix hermitian_from_params(const Eigen::VectorXd& theta, int n);

// First M rows of exp(i G(theta)), gauge fixed so each row's largest-modulus
// entry is real and positive.  Rows are orthonormal by construction;
// theta = 0 yields the canonical basis rows (C_m = c_m).
CMatrix modes_from_params(const Eigen::VectorXd& theta, int M, int N_R);

// Completes M orthonormal rows to a full N x N unitary whose top rows equal
// the input exactly.
CMatrix extend_to_unitary(const CMatrix& rows);

// Composite-space mode indices selected by a mode set (inputs come first in
// the composite ordering).
std::vector<int> select_modes(const ReservoirConfig& cfg, ModeSet set);
int mode_count(const ReservoirConfig& cfg, ModeSet set);

// Applies the passive transform induced by the mixer and keeps the first M
// output modes.  rho must live on exactly the N_R selected modes (reduce a
// composite state with partial_trace + select_modes first).  The transform
// conserves total photon number, so it is exact on every Fock sector the
// truncation represents completely; if the probability mass above that range
// exceeds overflow_tol, a CutoffError is thrown (raise the cutoffs).
// The identity mixer (theta = 0) returns the marginal of the first M modes.
DensityMatrix output_state(const DensityMatrix& rho, const ModeMixer& mixer,
                           double overflow_tol = 1e-3);

// Training specification for the quantum readout.  kWo optimizes the mixer
// parameters only; kWio also optimizes the input coupling matrix, squashed
// elementwise onto (0, gamma) through a logistic map so every candidate stays
// a valid coupling (input rates are re-derived on each evaluation).
struct TrainSpec {
  Trainable trainable = Trainable::kWo;
  CostKind cost = CostKind::kEf;
  ModeSet mode_set = ModeSet::kAll;
  int M = 1;
  int max_iters = 400;
  double tolerance = 1e-4;
  // Fraction of the target-aligned steps held out for evaluation (tail).
  double eval_fraction = 0.2;
  // Photon-mass tolerance passed to the overflow check during training.
  double overflow_tol = 0.25;
  // Initial simplex offsets for mixer angles and squashed couplings.
  double theta_step = 0.25;
  double wio_step = 0.75;
};

// Packed parameter vector: mixer theta (N_R^2 entries), then, for kWio, the
// pre-squash coupling entries in the storage order of ReservoirConfig::W_in.
double cost_eval(const Eigen::VectorXd& params, const HybridSequence& data,
                 const TrainSpec& spec, const ReservoirConfig& cfg);

struct TrainResult {
  Eigen::VectorXd params;
  ModeMixer mixer;
  Eigen::MatrixXd W_in;
  double train_error = 0.0;
  double eval_error = 0.0;
  // Error of the untrained reference readout: the input-mode marginal at the
  // readout time, i.e. the output is the same mode the input was written to.
  double baseline_error = 0.0;
  std::vector<double> history;  // best cost per optimizer iteration
  int iterations = 0;
  // Physicality record of the dynamics run behind the final parameters.
  PhysicalityStats stats;
};

// Runs the reservoir over the sequence once per distinct input coupling,
// memoizing the recorded marginals, and minimizes the chosen cost with the
// downhill simplex.  For kWio the mixer is first warmed up at the initial
// coupling, then mixer and coupling are optimized jointly.
TrainResult train_quantum_readout(const ReservoirConfig& cfg,
                                  const HybridSequence& data,
                                  const TrainSpec& spec);

}  // namespace qrp
