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
#include <stdexcept>
#include <string>
#include <vector>

#include "qrp/hilbert.hpp"
#include "qrp/operators.hpp"
#include "qrp/rng.hpp"
#include "qrp/sequence.hpp"
#include "qrp/sparse.hpp"

namespace qrp {

// What to do when a mode's top Fock level accumulates more population than
// cutoff_tol at a measurement time.
enum class CutoffPolicy {
  kWarn,       // record the worst excess and continue
  kStrict,     // throw CutoffError
  kAutoRaise,  // run_sequence retries with a larger site cutoff
};

struct CutoffError : std::runtime_error {
  CutoffError(int mode_in, double population_in, const std::string& what)
      : std::runtime_error(what), mode(mode_in), population(population_in) {}
  int mode;
  double population;
};

// Dissipative bosonic network driven through cascaded input modes.  All rates
// (E, h, Q, P, W, W_in, gamma_k) share gamma's scale and times (tau, t_init,
// step) are measured against 1/gamma; the defaults express the usual choice
// gamma = 1 so that stored numbers read directly in units of gamma.
struct ReservoirConfig {
  int N = 3;                            // network sites
  int site_cutoff = 3;                  // Fock dim per site
  std::vector<int> input_cutoffs = {2}; // Fock dim per input mode

  Eigen::VectorXd E;      // onsite energies, size N (default 0)
  Eigen::MatrixXd h;      // symmetric hopping, N x N (lattice bonds only)
  Eigen::VectorXd Q;      // onsite Kerr-type nonlinearity, size N
  double P = 0.0;         // constant coherent drive on every site
  double W = 0.0;         // classical input scaling: drive P + W u(t)
  double gamma = 1.0;     // site decay rate; the unit of time is 1/gamma

  Eigen::MatrixXd W_in;     // N x n_inputs cascade couplings, entries [0, gamma]
  Eigen::VectorXd gamma_k;  // input decay rates, gamma_k = sum_j W_in(j,k)^2/gamma

  double tau = 1.0;      // input interval
  double t_init = 5.0;   // warmup duration
  int V = 1;             // measurements per interval
  double step = 0.01;    // RK4 step size
  std::uint64_t seed = 0;

  CutoffPolicy cutoff_policy = CutoffPolicy::kWarn;
  double cutoff_tol = 1e-3;  // max tolerated top-level population
  double psd_tol = 1e-7;     // positivity slack checked at recorded times

  int n_inputs() const { return static_cast<int>(input_cutoffs.size()); }
};

// Input modes first (most significant), then the N sites.
HilbertSpace composite_space(const ReservoirConfig& cfg);
HilbertSpace site_space(const ReservoirConfig& cfg);
HilbertSpace input_space(const ReservoirConfig& cfg);

// Nearest-neighbor bonds of the most-square 2-D lattice holding N sites
// (rows = largest divisor of N that is <= sqrt(N)).
std::vector<std::pair<int, int>> lattice_bonds(int N);

// Fills E (zeros), h (uniform [0, gamma] on lattice bonds, symmetric), Q
// (constant q_strength), W_in (uniform [0, gamma]) and the derived gamma_k.
void randomize_couplings(ReservoirConfig& cfg, double q_strength, Rng& rng);

// Recomputes gamma_k from W_in; call after editing W_in by hand.
void derive_input_rates(ReservoirConfig& cfg);

// Throws std::invalid_argument describing every violated field constraint.
void validate_config(const ReservoirConfig& cfg);

// Site-only Hamiltonian with drive amplitude P + W u applied to every site;
// input modes carry no Hamiltonian terms.
Operator build_hamiltonian(const ReservoirConfig& cfg, double u);

// Time derivative of rho under the cascaded master equation.  Reference
// implementation with dense algebra; the integrator uses the sparse path and
// is tested against this one.
CMatrix master_rhs(const DensityMatrix& rho, const Operator& hamiltonian,
                   const ReservoirConfig& cfg, bool input_active);

// Sparse master-equation evaluator.  The drive-dependent part of the stiffness
// operator shares one sparsity pattern with the static part, so retuning the
// drive between input intervals only rewrites the value array.
class MasterOps {
 public:
  MasterOps(const ReservoirConfig& cfg, bool input_active);

  void set_drive(double drive_amplitude);  // P + W u
  void eval(const CMatrix& rho, CMatrix& out) const;
  int dim() const { return dim_; }

  // Largest RK4 step inside the stability region at this drive amplitude,
  // from norm bounds on the generator; strong input spikes shrink it below
  // the configured base step.
  double stable_step(double drive_amplitude) const;

 private:
  int dim_ = 0;
  double gamma_ = 0.0;
  bool input_active_ = false;
  double lambda_static_ = 0.0;  // drive-independent generator norm bound
  double lambda_drive_ = 0.0;   // growth per unit drive amplitude
  SparseOp stiffness_;                  // F with current drive folded in
  std::vector<complexd> static_vals_;   // F at zero drive
  std::vector<complexd> drive_vals_;    // dF/d(drive)
  std::vector<SparseOp> site_lower_;    // c_j
  std::vector<SparseOp> site_raise_;    // c_j^dag (right factors)
  std::vector<SparseOp> input_lower_;   // a_k
  std::vector<SparseOp> input_right_;   // gamma_k a_k^dag / 2 + sum_j W_jk c_j^dag
  mutable CMatrix scratch_;
  mutable CMatrix cascade_;
};

// Fixed-step RK4 over t_span with constant classical input u, followed by
// Hermitization and trace renormalization.  Throws std::runtime_error when the
// state leaves the representable range (cutoff too small for the drive).
DensityMatrix integrate(const DensityMatrix& rho0, const ReservoirConfig& cfg,
                        double u, double t_span, bool input_active);

// Relaxes the all-vacuum state under the constant drive P with input coupling
// off for t_init.  steady_residual (optional out) receives the Frobenius
// distance between the states at t_init - 0.5/gamma and t_init.
DensityMatrix warmup(const ReservoirConfig& cfg,
                     double* steady_residual = nullptr);

// Replaces the input-mode marginal: beta tensor Tr_inputs(rho).
DensityMatrix inject(const DensityMatrix& rho, const DensityMatrix& beta);

// Expectation of each site occupation number.
Eigen::VectorXd site_occupations(const CMatrix& rho, const ReservoirConfig& cfg);

struct PhysicalityStats {
  double max_trace_drift = 0.0;     // worst |Tr rho - 1| seen pre-renormalization
  double accumulated_drift = 0.0;   // sum of per-segment drifts
  int psd_violations = 0;           // recorded times failing the psd_tol check
  double worst_negative_eig = 0.0;  // most negative eigenvalue among violations
  double max_top_population = 0.0;  // worst top-Fock-level population (sites)
  double steady_residual = 0.0;     // warmup steadiness measure
  bool steady_state_warning = false;
  int cutoff_raises = 0;            // auto-raise retries consumed
  double total_time = 0.0;          // integrated time including warmup
  int measurements = 0;
};

// Multiplexed occupation features: row l holds N*V readouts in site-major,
// time-minor order (col j*V + v - 1 is site j at time t_l + v tau / V), plus a
// trailing bias column fixed at 1.
struct FeatureMatrix {
  Eigen::MatrixXd X;
  int N = 0;
  int V = 0;
  int feature_count() const { return N * V; }  // excludes bias
};

// Owns the evolving state between input intervals so closed-loop tasks can
// interleave predictions with dynamics.
class ReservoirSimulator {
 public:
  explicit ReservoirSimulator(ReservoirConfig cfg);

  // Runs warmup and clears statistics.
  void reset();

  const ReservoirConfig& config() const { return cfg_; }
  const DensityMatrix& state() const { return rho_; }
  void set_state(DensityMatrix rho);  // for echo-state experiments
  const PhysicalityStats& stats() const { return stats_; }
  double elapsed() const { return stats_.total_time; }

  // Injects beta, drives with u for one interval tau, and returns the N*V
  // feature readouts (bias not included).
  Eigen::VectorXd step(double u, const DensityMatrix& beta);
  // Same interval without replacing the input marginal (configs with no
  // input modes, or carry-over experiments).
  Eigen::VectorXd step(double u);

  DensityMatrix input_marginal() const;
  DensityMatrix site_marginal() const;

 private:
  void check_recorded_state();

  ReservoirConfig cfg_;
  HilbertSpace space_;
  MasterOps ops_;          // input coupling active
  DensityMatrix rho_;
  PhysicalityStats stats_;
  CMatrix k1_, k2_, k3_, k4_, stage_;
};

// Full protocol: warmup, then one step per sequence entry.  When marginal
// modes are given, the reduced state on those modes at the end of every
// interval is appended to *marginals.  stats (optional) receives the run's
// physicality record.  Under CutoffPolicy::kAutoRaise the whole run restarts
// with site_cutoff + 1 (up to max_cutoff_raises) whenever the monitor trips.
FeatureMatrix run_sequence(const ReservoirConfig& cfg,
                           const HybridSequence& seq,
                           PhysicalityStats* stats = nullptr,
                           const std::vector<int>* marginal_modes = nullptr,
                           std::vector<CMatrix>* marginals = nullptr,
                           int max_cutoff_raises = 3);

}  // namespace qrp
