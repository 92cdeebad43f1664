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

#include "qrp/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace qrp {
namespace {

constexpr complexd kI(0.0, 1.0);

int site_mode(const ReservoirConfig& cfg, int j) { return cfg.n_inputs() + j; }

double entry_or_zero(const Eigen::VectorXd& v, int j) {
  return v.size() > 0 ? v[j] : 0.0;
}

Eigen::VectorXd compute_input_rates(const ReservoirConfig& cfg) {
  Eigen::VectorXd rates(cfg.n_inputs());
  for (int k = 0; k < cfg.n_inputs(); ++k) {
    double acc = 0.0;
    for (int j = 0; j < cfg.N; ++j) acc += cfg.W_in(j, k) * cfg.W_in(j, k);
    rates[k] = acc / cfg.gamma;
  }
  return rates;
}

// Static part (energies, hopping, Kerr nonlinearity) and unit-amplitude drive
// part sum_j (c_j^dag + c_j); H(u) = static + (P + W u) * drive.
std::pair<CMatrix, CMatrix> hamiltonian_parts(const ReservoirConfig& cfg,
                                              const HilbertSpace& space) {
  const int dim = space.total_dim();
  CMatrix h_static = CMatrix::Zero(dim, dim);
  CMatrix h_drive = CMatrix::Zero(dim, dim);

  for (int idx = 0; idx < dim; ++idx) {
    double diag = 0.0;
    for (int j = 0; j < cfg.N; ++j) {
      const double n = space.level_of(idx, site_mode(cfg, j));
      diag += entry_or_zero(cfg.E, j) * n;
      diag += entry_or_zero(cfg.Q, j) * n * (n - 1.0);
    }
    h_static(idx, idx) = diag;
  }

  if (cfg.h.size() > 0) {
    for (const auto& [i, j] : lattice_bonds(cfg.N)) {
      const double amp = cfg.h(i, j);
      if (amp == 0.0) continue;
      const CMatrix ci = annihilator(space, site_mode(cfg, i)).mat;
      const CMatrix cj = annihilator(space, site_mode(cfg, j)).mat;
      const CMatrix hop = ci.adjoint() * cj;
      h_static += amp * (hop + hop.adjoint());
    }
  }

  for (int j = 0; j < cfg.N; ++j) {
    const CMatrix cj = annihilator(space, site_mode(cfg, j)).mat;
    h_drive += cj + cj.adjoint();
  }
  return {std::move(h_static), std::move(h_drive)};
}

void rk4_steps(const MasterOps& ops, CMatrix& rho, int steps, double h,
               CMatrix& k1, CMatrix& k2, CMatrix& k3, CMatrix& k4,
               CMatrix& stage) {
  for (int s = 0; s < steps; ++s) {
    ops.eval(rho, k1);
    stage = rho + (0.5 * h) * k1;
    ops.eval(stage, k2);
    stage = rho + (0.5 * h) * k2;
    ops.eval(stage, k3);
    stage = rho + h * k3;
    ops.eval(stage, k4);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!rho.allFinite()) {
      throw std::runtime_error(
          "integrate: state became non-finite; the Fock cutoff is too small "
          "for the drive strength or the step size is too large");
    }
  }
}

// Restores exact Hermiticity and unit trace; returns |trace - 1| beforehand.
double restore_state(CMatrix& rho) {
  const complexd tr = rho.trace();
  const double drift = std::abs(tr - complexd(1.0, 0.0));
  rho = hermitize(rho);
  rho /= rho.trace().real();
  return drift;
}

double top_population(const CMatrix& rho, const HilbertSpace& space,
                      int mode) {
  const int top = space.dim(mode) - 1;
  double pop = 0.0;
  for (int idx = 0; idx < space.total_dim(); ++idx) {
    if (space.level_of(idx, mode) == top) pop += rho(idx, idx).real();
  }
  return pop;
}

}  // namespace

HilbertSpace composite_space(const ReservoirConfig& cfg) {
  std::vector<int> dims = cfg.input_cutoffs;
  dims.insert(dims.end(), cfg.N, cfg.site_cutoff);
  return HilbertSpace(dims);
}

HilbertSpace site_space(const ReservoirConfig& cfg) {
  return HilbertSpace(std::vector<int>(cfg.N, cfg.site_cutoff));
}

HilbertSpace input_space(const ReservoirConfig& cfg) {
  return HilbertSpace(cfg.input_cutoffs);
}

std::vector<std::pair<int, int>> lattice_bonds(int N) {
  if (N < 1) throw std::invalid_argument("lattice_bonds: N must be positive");
  int rows = 1;
  for (int r = 1; r * r <= N; ++r) {
    if (N % r == 0) rows = r;
  }
  const int cols = N / rows;
  std::vector<std::pair<int, int>> bonds;
  for (int a = 0; a < rows; ++a) {
    for (int b = 0; b < cols; ++b) {
      const int s = a * cols + b;
      if (b + 1 < cols) bonds.emplace_back(s, s + 1);
      if (a + 1 < rows) bonds.emplace_back(s, s + cols);
    }
  }
  return bonds;
}

void derive_input_rates(ReservoirConfig& cfg) {
  cfg.gamma_k = compute_input_rates(cfg);
}

void randomize_couplings(ReservoirConfig& cfg, double q_strength, Rng& rng) {
  cfg.E = Eigen::VectorXd::Zero(cfg.N);
  cfg.Q = Eigen::VectorXd::Constant(cfg.N, q_strength);
  cfg.W_in.resize(cfg.N, cfg.n_inputs());
  for (int k = 0; k < cfg.n_inputs(); ++k) {
    for (int j = 0; j < cfg.N; ++j) cfg.W_in(j, k) = rng.uniform(0.0, cfg.gamma);
  }
  cfg.h = Eigen::MatrixXd::Zero(cfg.N, cfg.N);
  for (const auto& [i, j] : lattice_bonds(cfg.N)) {
    const double amp = rng.uniform(0.0, cfg.gamma);
    cfg.h(i, j) = amp;
    cfg.h(j, i) = amp;
  }
  derive_input_rates(cfg);
}

void validate_config(const ReservoirConfig& cfg) {
  std::ostringstream oss;
  if (cfg.N < 1) oss << "N must be >= 1; ";
  if (cfg.site_cutoff < 2) oss << "site_cutoff must be >= 2; ";
  for (int d : cfg.input_cutoffs) {
    if (d < 2) {
      oss << "input cutoffs must be >= 2; ";
      break;
    }
  }
  if (cfg.gamma <= 0.0) oss << "gamma must be positive; ";
  if (cfg.tau <= 0.0) oss << "tau must be positive; ";
  if (cfg.t_init < 0.0) oss << "t_init must be non-negative; ";
  if (cfg.V < 1) oss << "V must be >= 1; ";
  if (cfg.step <= 0.0) oss << "step must be positive; ";
  if (cfg.cutoff_tol <= 0.0) oss << "cutoff_tol must be positive; ";
  if (cfg.psd_tol < 0.0) oss << "psd_tol must be non-negative; ";

  if (cfg.E.size() != 0 && cfg.E.size() != cfg.N) oss << "E size mismatch; ";
  if (cfg.Q.size() != 0 && cfg.Q.size() != cfg.N) oss << "Q size mismatch; ";
  if (cfg.h.size() != 0) {
    if (cfg.h.rows() != cfg.N || cfg.h.cols() != cfg.N) {
      oss << "h must be N x N; ";
    } else {
      if ((cfg.h - cfg.h.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        oss << "h must be symmetric; ";
      }
      if (cfg.h.minCoeff() < 0.0) oss << "h entries must be non-negative; ";
    }
  }
  if (cfg.n_inputs() == 0) {
    if (cfg.W_in.size() != 0) oss << "W_in must be empty without input modes; ";
    if (cfg.gamma_k.size() != 0) {
      oss << "gamma_k must be empty without input modes; ";
    }
  } else if (cfg.W_in.rows() != cfg.N || cfg.W_in.cols() != cfg.n_inputs()) {
    oss << "W_in must be N x n_inputs; ";
  } else {
    if (cfg.W_in.minCoeff() < 0.0) {
      oss << "W_in entries must be non-negative; ";
    }
    const Eigen::VectorXd expected = compute_input_rates(cfg);
    if (cfg.gamma_k.size() != expected.size() ||
        !(cfg.gamma_k.array() == expected.array()).all()) {
      oss << "gamma_k inconsistent with W_in (call derive_input_rates); ";
    }
  }
  const std::string msg = oss.str();
  if (!msg.empty()) {
    throw std::invalid_argument("invalid ReservoirConfig: " + msg);
  }
}

Operator build_hamiltonian(const ReservoirConfig& cfg, double u) {
  validate_config(cfg);
  const HilbertSpace space = composite_space(cfg);
  auto [h_static, h_drive] = hamiltonian_parts(cfg, space);
  h_static += (cfg.P + cfg.W * u) * h_drive;
  return Operator{space, std::move(h_static)};
}

CMatrix master_rhs(const DensityMatrix& rho, const Operator& hamiltonian,
                   const ReservoirConfig& cfg, bool input_active) {
  if (rho.space != hamiltonian.space ||
      rho.space != composite_space(cfg)) {
    throw std::invalid_argument("master_rhs: space mismatch");
  }
  const CMatrix& r = rho.mat;
  CMatrix out = -kI * (hamiltonian.mat * r - r * hamiltonian.mat);

  auto lindblad = [&](const CMatrix& l, double rate) {
    const CMatrix lr = l * r;
    out += rate * (lr * l.adjoint());
    const CMatrix ll = l.adjoint() * l;
    out -= (0.5 * rate) * (ll * r + r * ll);
  };

  for (int j = 0; j < cfg.N; ++j) {
    lindblad(annihilator(rho.space, site_mode(cfg, j)).mat, cfg.gamma);
  }
  if (input_active) {
    for (int k = 0; k < cfg.n_inputs(); ++k) {
      const CMatrix a = annihilator(rho.space, k).mat;
      lindblad(a, cfg.gamma_k[k]);
      for (int j = 0; j < cfg.N; ++j) {
        const double w = cfg.W_in(j, k);
        if (w == 0.0) continue;
        const CMatrix c = annihilator(rho.space, site_mode(cfg, j)).mat;
        // w ([a rho, c^dag] + [c, rho a^dag])
        out += w * (a * r * c.adjoint() - c.adjoint() * a * r +
                    c * r * a.adjoint() - r * a.adjoint() * c);
      }
    }
  }
  return out;
}

MasterOps::MasterOps(const ReservoirConfig& cfg, bool input_active) {
  validate_config(cfg);
  const HilbertSpace space = composite_space(cfg);
  dim_ = space.total_dim();
  gamma_ = cfg.gamma;
  input_active_ = input_active;

  std::vector<CMatrix> site_ops;
  site_ops.reserve(cfg.N);
  for (int j = 0; j < cfg.N; ++j) {
    site_ops.push_back(annihilator(space, site_mode(cfg, j)).mat);
    site_lower_.push_back(SparseOp::from_dense(site_ops.back()));
    site_raise_.push_back(SparseOp::from_dense(site_ops.back().adjoint()));
  }

  auto [h_static, h_drive] = hamiltonian_parts(cfg, space);
  CMatrix f_static = -kI * h_static;
  for (int j = 0; j < cfg.N; ++j) {
    f_static -= (0.5 * cfg.gamma) * (site_ops[j].adjoint() * site_ops[j]);
  }
  if (input_active) {
    for (int k = 0; k < cfg.n_inputs(); ++k) {
      const CMatrix a = annihilator(space, k).mat;
      input_lower_.push_back(SparseOp::from_dense(a));
      f_static -= (0.5 * cfg.gamma_k[k]) * (a.adjoint() * a);
      CMatrix right = (0.5 * cfg.gamma_k[k]) * a.adjoint();
      for (int j = 0; j < cfg.N; ++j) {
        const double w = cfg.W_in(j, k);
        if (w != 0.0) {
          right += w * site_ops[j].adjoint();
          f_static -= w * (site_ops[j].adjoint() * a);
        }
      }
      input_right_.push_back(SparseOp::from_dense(right));
    }
  }
  const CMatrix f_drive = -kI * h_drive;

  // Spectral bound on the full generator: commutators double the Hamiltonian
  // norms, the anticommutator halves live in F, and the sandwich terms are
  // bounded through the factor norms |c_j|^2 = cutoff - 1.
  double f_diss = 0.0;
  double sandwich = 0.0;
  for (int j = 0; j < cfg.N; ++j) {
    const double sq = space.dim(site_mode(cfg, j)) - 1.0;
    f_diss += 0.5 * cfg.gamma * sq;
    sandwich += cfg.gamma * sq;
  }
  if (input_active) {
    for (int k = 0; k < cfg.n_inputs(); ++k) {
      const double ak = std::sqrt(space.dim(k) - 1.0);
      double right_norm = 0.5 * cfg.gamma_k[k] * ak;
      for (int j = 0; j < cfg.N; ++j) {
        right_norm +=
            cfg.W_in(j, k) * std::sqrt(space.dim(site_mode(cfg, j)) - 1.0);
      }
      f_diss += ak * right_norm;
      sandwich += 2.0 * ak * right_norm;
    }
  }
  const double h_static_norm =
      Eigen::SelfAdjointEigenSolver<CMatrix>(h_static, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .cwiseAbs()
          .maxCoeff();
  const double h_drive_norm =
      Eigen::SelfAdjointEigenSolver<CMatrix>(h_drive, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .cwiseAbs()
          .maxCoeff();
  lambda_static_ = 2.0 * (h_static_norm + f_diss) + sandwich;
  lambda_drive_ = 2.0 * h_drive_norm;

  // Union sparsity pattern of the static and drive parts; retuning the drive
  // only rewrites stiffness_.val.
  stiffness_.rows = dim_;
  stiffness_.cols = dim_;
  stiffness_.row_ptr.assign(dim_ + 1, 0);
  for (int i = 0; i < dim_; ++i) {
    for (int j = 0; j < dim_; ++j) {
      const complexd s = f_static(i, j);
      const complexd d = f_drive(i, j);
      if (s != complexd(0.0, 0.0) || d != complexd(0.0, 0.0)) {
        stiffness_.col.push_back(j);
        static_vals_.push_back(s);
        drive_vals_.push_back(d);
      }
    }
    stiffness_.row_ptr[i + 1] = static_cast<int>(stiffness_.col.size());
  }
  stiffness_.val = static_vals_;

  scratch_.resize(dim_, dim_);
  cascade_.resize(dim_, dim_);
}

double MasterOps::stable_step(double drive_amplitude) const {
  const double lambda =
      lambda_static_ + std::abs(drive_amplitude) * lambda_drive_;
  return 2.7 / std::max(lambda, 1e-12);
}

void MasterOps::set_drive(double drive_amplitude) {
  for (std::size_t i = 0; i < stiffness_.val.size(); ++i) {
    stiffness_.val[i] = static_vals_[i] + drive_amplitude * drive_vals_[i];
  }
}

void MasterOps::eval(const CMatrix& rho, CMatrix& out) const {
  csr_left_mul(stiffness_, rho, scratch_);
  out = scratch_ + scratch_.adjoint();
  for (std::size_t j = 0; j < site_lower_.size(); ++j) {
    csr_left_mul(site_lower_[j], rho, scratch_);
    csr_right_mul_add(scratch_, site_raise_[j], out, complexd(gamma_, 0.0));
  }
  if (input_active_ && !input_lower_.empty()) {
    cascade_.setZero(dim_, dim_);
    for (std::size_t k = 0; k < input_lower_.size(); ++k) {
      csr_left_mul(input_lower_[k], rho, scratch_);
      csr_right_mul_add(scratch_, input_right_[k], cascade_,
                        complexd(1.0, 0.0));
    }
    out += cascade_ + cascade_.adjoint();
  }
}

DensityMatrix integrate(const DensityMatrix& rho0, const ReservoirConfig& cfg,
                        double u, double t_span, bool input_active) {
  validate_config(cfg);
  if (rho0.space != composite_space(cfg)) {
    throw std::invalid_argument("integrate: state space mismatch");
  }
  if (t_span < 0.0) throw std::invalid_argument("integrate: negative t_span");
  DensityMatrix rho = rho0;
  if (t_span == 0.0) return rho;

  MasterOps ops(cfg, input_active);
  const double amp = cfg.P + cfg.W * u;
  ops.set_drive(amp);
  const double h_max = std::min(cfg.step, ops.stable_step(amp));
  const int steps = static_cast<int>(std::ceil(t_span / h_max));
  const double h = t_span / steps;
  CMatrix k1, k2, k3, k4, stage;
  rk4_steps(ops, rho.mat, steps, h, k1, k2, k3, k4, stage);
  restore_state(rho.mat);
  return rho;
}

DensityMatrix warmup(const ReservoirConfig& cfg, double* steady_residual) {
  validate_config(cfg);
  const HilbertSpace space = composite_space(cfg);
  DensityMatrix rho = vacuum_state(space);
  if (cfg.t_init == 0.0) {
    if (steady_residual) *steady_residual = 0.0;
    return rho;
  }

  MasterOps ops(cfg, false);
  ops.set_drive(cfg.P);
  const double h_max = std::min(cfg.step, ops.stable_step(cfg.P));
  CMatrix k1, k2, k3, k4, stage;
  const double checkpoint_gap = std::min(0.5 / cfg.gamma, cfg.t_init);
  const double leg1 = cfg.t_init - checkpoint_gap;

  auto advance = [&](double span) {
    if (span <= 0.0) return;
    const int steps = static_cast<int>(std::ceil(span / h_max));
    rk4_steps(ops, rho.mat, steps, span / steps, k1, k2, k3, k4, stage);
    restore_state(rho.mat);
  };

  advance(leg1);
  const CMatrix before = rho.mat;
  advance(checkpoint_gap);
  if (steady_residual) *steady_residual = (rho.mat - before).norm();
  return rho;
}

DensityMatrix inject(const DensityMatrix& rho, const DensityMatrix& beta) {
  const int n_in = beta.space.modes();
  if (rho.space.modes() <= n_in) {
    throw std::invalid_argument("inject: state has no reservoir modes");
  }
  for (int m = 0; m < n_in; ++m) {
    if (rho.space.dim(m) != beta.space.dim(m)) {
      throw std::invalid_argument("inject: input-mode dimension mismatch");
    }
  }
  std::vector<int> keep;
  for (int m = n_in; m < rho.space.modes(); ++m) keep.push_back(m);
  const CMatrix reduced = partial_trace(rho.mat, rho.space, keep);
  return DensityMatrix{rho.space, kron(beta.mat, reduced)};
}

Eigen::VectorXd site_occupations(const CMatrix& rho,
                                 const ReservoirConfig& cfg) {
  const HilbertSpace space = composite_space(cfg);
  Eigen::VectorXd occ = Eigen::VectorXd::Zero(cfg.N);
  for (int idx = 0; idx < space.total_dim(); ++idx) {
    const double p = rho(idx, idx).real();
    for (int j = 0; j < cfg.N; ++j) {
      occ[j] += p * space.level_of(idx, site_mode(cfg, j));
    }
  }
  return occ;
}

ReservoirSimulator::ReservoirSimulator(ReservoirConfig cfg)
    : cfg_(std::move(cfg)),
      space_(composite_space(cfg_)),
      ops_(cfg_, true),
      rho_{space_, CMatrix()} {
  const int dim = space_.total_dim();
  k1_.resize(dim, dim);
  k2_.resize(dim, dim);
  k3_.resize(dim, dim);
  k4_.resize(dim, dim);
  stage_.resize(dim, dim);
  reset();
}

void ReservoirSimulator::reset() {
  stats_ = PhysicalityStats{};
  double residual = 0.0;
  rho_ = warmup(cfg_, &residual);
  stats_.steady_residual = residual;
  stats_.steady_state_warning = residual > 1e-3;
  stats_.total_time = cfg_.t_init;
}

void ReservoirSimulator::set_state(DensityMatrix rho) {
  if (rho.space != space_) {
    throw std::invalid_argument("set_state: space mismatch");
  }
  rho_ = std::move(rho);
}

Eigen::VectorXd ReservoirSimulator::step(double u, const DensityMatrix& beta) {
  rho_ = inject(rho_, beta);
  return step(u);
}

Eigen::VectorXd ReservoirSimulator::step(double u) {
  const double amp = cfg_.P + cfg_.W * u;
  ops_.set_drive(amp);

  const double sub = cfg_.tau / cfg_.V;
  const double h_max = std::min(cfg_.step, ops_.stable_step(amp));
  const int steps = static_cast<int>(std::ceil(sub / h_max));
  const double h = sub / steps;

  Eigen::VectorXd features(cfg_.N * cfg_.V);
  for (int v = 1; v <= cfg_.V; ++v) {
    rk4_steps(ops_, rho_.mat, steps, h, k1_, k2_, k3_, k4_, stage_);
    const double drift = restore_state(rho_.mat);
    stats_.max_trace_drift = std::max(stats_.max_trace_drift, drift);
    stats_.accumulated_drift += drift;
    const Eigen::VectorXd occ = site_occupations(rho_.mat, cfg_);
    for (int j = 0; j < cfg_.N; ++j) features[j * cfg_.V + v - 1] = occ[j];
    ++stats_.measurements;
    check_recorded_state();
  }
  stats_.total_time += cfg_.tau;
  return features;
}

DensityMatrix ReservoirSimulator::input_marginal() const {
  std::vector<int> keep;
  for (int m = 0; m < cfg_.n_inputs(); ++m) keep.push_back(m);
  return partial_trace(rho_, keep);
}

DensityMatrix ReservoirSimulator::site_marginal() const {
  std::vector<int> keep;
  for (int m = cfg_.n_inputs(); m < space_.modes(); ++m) keep.push_back(m);
  return partial_trace(rho_, keep);
}

void ReservoirSimulator::check_recorded_state() {
  const int dim = space_.total_dim();
  const CMatrix shifted =
      rho_.mat + cfg_.psd_tol * CMatrix::Identity(dim, dim);
  Eigen::LLT<CMatrix> llt(shifted);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_.mat,
                                              Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -cfg_.psd_tol) {
      ++stats_.psd_violations;
      stats_.worst_negative_eig =
          std::min(stats_.worst_negative_eig, min_eig);
    }
  }

  for (int j = 0; j < cfg_.N; ++j) {
    const double pop = top_population(rho_.mat, space_, site_mode(cfg_, j));
    stats_.max_top_population = std::max(stats_.max_top_population, pop);
    if (pop > cfg_.cutoff_tol &&
        cfg_.cutoff_policy != CutoffPolicy::kWarn) {
      std::ostringstream oss;
      oss << "site " << j << " top-level population " << pop << " exceeds "
          << cfg_.cutoff_tol << " (site_cutoff " << cfg_.site_cutoff << ")";
      throw CutoffError(site_mode(cfg_, j), pop, oss.str());
    }
  }
}

FeatureMatrix run_sequence(const ReservoirConfig& cfg,
                           const HybridSequence& seq, PhysicalityStats* stats,
                           const std::vector<int>* marginal_modes,
                           std::vector<CMatrix>* marginals,
                           int max_cutoff_raises) {
  if (seq.u.empty()) throw std::invalid_argument("run_sequence: empty input");
  if (!seq.beta.empty() && seq.beta.size() != seq.u.size()) {
    throw std::invalid_argument(
        "run_sequence: classical/quantum input lengths differ");
  }

  ReservoirConfig local = cfg;
  int raises = 0;
  for (;;) {
    try {
      ReservoirSimulator sim(local);
      const bool can_inject = local.n_inputs() > 0;
      DensityMatrix vac;
      if (can_inject && seq.beta.empty()) {
        vac = vacuum_state(input_space(local));
      }
      const int L = static_cast<int>(seq.u.size());
      FeatureMatrix features;
      features.N = local.N;
      features.V = local.V;
      features.X.resize(L, local.N * local.V + 1);
      if (marginals) marginals->clear();
      for (int l = 0; l < L; ++l) {
        const Eigen::VectorXd f =
            !can_inject ? sim.step(seq.u[l])
                        : sim.step(seq.u[l],
                                   seq.beta.empty() ? vac : seq.beta[l]);
        features.X.row(l).head(f.size()) = f;
        features.X(l, local.N * local.V) = 1.0;
        if (marginal_modes && marginals) {
          marginals->push_back(
              partial_trace(sim.state().mat, sim.state().space,
                            *marginal_modes));
        }
      }
      if (stats) {
        *stats = sim.stats();
        stats->cutoff_raises = raises;
      }
      return features;
    } catch (const CutoffError&) {
      if (cfg.cutoff_policy != CutoffPolicy::kAutoRaise ||
          raises >= max_cutoff_raises) {
        throw;
      }
      ++raises;
      local.site_cutoff += 1;
    }
  }
}

}  // namespace qrp
