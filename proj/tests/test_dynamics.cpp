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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "qrp/operators.hpp"
#include "qrp/reservoir.hpp"
#include "qrp/rng.hpp"
#include "qrp/sequence.hpp"
#include "qrp/states.hpp"

namespace {

using qrp::CMatrix;
using qrp::complexd;
using qrp::DensityMatrix;
using qrp::HilbertSpace;
using qrp::ReservoirConfig;

double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

ReservoirConfig tiny_config(int N, int site_cutoff, int input_cutoff,
                            std::uint64_t seed) {
  ReservoirConfig cfg;
  cfg.N = N;
  cfg.site_cutoff = site_cutoff;
  cfg.input_cutoffs = {input_cutoff};
  cfg.P = 0.1;
  cfg.W = 1.0;
  cfg.V = 4;
  cfg.step = 0.01;
  qrp::Rng rng(seed);
  qrp::randomize_couplings(cfg, 0.0, rng);
  cfg.seed = seed;
  return cfg;
}

// Dense Liouvillian built column by column from the reference right-hand
// side; vec uses the row-major layout of CMatrix so Maps are flat copies.
Eigen::MatrixXcd build_liouvillian(const ReservoirConfig& cfg, double u,
                                   bool input_active) {
  const HilbertSpace space = qrp::composite_space(cfg);
  const int dim = static_cast<int>(space.total_dim());
  const qrp::Operator h = qrp::build_hamiltonian(cfg, u);
  Eigen::MatrixXcd liou(dim * dim, dim * dim);
  for (int col = 0; col < dim * dim; ++col) {
    CMatrix basis = CMatrix::Zero(dim, dim);
    basis(col / dim, col % dim) = 1.0;
    const CMatrix deriv =
        qrp::master_rhs(DensityMatrix{space, basis}, h, cfg, input_active);
    liou.col(col) =
        Eigen::Map<const Eigen::VectorXcd>(deriv.data(), dim * dim);
  }
  return liou;
}

CMatrix exact_evolution(const ReservoirConfig& cfg, const CMatrix& rho0,
                        double u, double t, bool input_active) {
  const Eigen::MatrixXcd liou = build_liouvillian(cfg, u, input_active);
  const int dim = static_cast<int>(rho0.rows());
  const Eigen::MatrixXcd propagator = (liou * t).exp();
  const Eigen::VectorXcd v =
      propagator *
      Eigen::Map<const Eigen::VectorXcd>(rho0.data(), dim * dim);
  CMatrix out(dim, dim);
  Eigen::Map<Eigen::VectorXcd>(out.data(), dim * dim) = v;
  return out;
}

}  // namespace

TEST_CASE("empty Hamiltonian configurations produce the zero operator") {
  ReservoirConfig cfg = tiny_config(2, 2, 2, 1);
  cfg.E.setZero();
  cfg.h.setZero();
  cfg.Q.setZero();
  cfg.P = 0.0;
  cfg.W = 0.0;
  const qrp::Operator h = qrp::build_hamiltonian(cfg, 0.0);
  CHECK(max_abs(h.mat) == 0.0);
}

TEST_CASE("Hamiltonian is Hermitian for random configurations") {
  for (std::uint64_t seed : {2, 3, 4}) {
    ReservoirConfig cfg = tiny_config(3, 3, 2, seed);
    qrp::Rng rng(seed + 10);
    qrp::randomize_couplings(cfg, 0.7, rng);
    const CMatrix h = qrp::build_hamiltonian(cfg, 0.4).mat;
    CHECK(max_abs(h - h.adjoint()) < 1e-12);
  }
}

TEST_CASE("uniform drive produces sqrt(n+1) ladder elements") {
  ReservoirConfig cfg;
  cfg.N = 1;
  cfg.site_cutoff = 3;
  cfg.input_cutoffs = {2};
  cfg.E = Eigen::VectorXd::Zero(1);
  cfg.h = Eigen::MatrixXd::Zero(1, 1);
  cfg.Q = Eigen::VectorXd::Zero(1);
  cfg.W_in = Eigen::MatrixXd::Zero(1, 1);
  qrp::derive_input_rates(cfg);
  cfg.P = 1.0;
  const CMatrix h = qrp::build_hamiltonian(cfg, 0.0).mat;
  // Input mode first: H = I_2 (x) H_site.
  CMatrix site = CMatrix::Zero(3, 3);
  for (int n = 0; n < 2; ++n) {
    site(n, n + 1) = std::sqrt(n + 1.0);
    site(n + 1, n) = std::sqrt(n + 1.0);
  }
  const CMatrix expected = qrp::kron(CMatrix::Identity(2, 2), site);
  CHECK(max_abs(h - expected) < 1e-12);
}

TEST_CASE("master equation derivative is traceless and Hermitian") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 5);
  const HilbertSpace space = qrp::composite_space(cfg);
  const qrp::Operator h = qrp::build_hamiltonian(cfg, 0.3);
  for (int rep = 0; rep < 5; ++rep) {
    const DensityMatrix rho = qrp::random_state(
        static_cast<int>(space.total_dim()), 50 + rep,
        qrp::StateKind::kMixed);
    DensityMatrix on_space{space, rho.mat};
    const CMatrix deriv = qrp::master_rhs(on_space, h, cfg, true);
    CHECK(std::abs(deriv.trace()) < 1e-12);
    CHECK(max_abs(deriv - deriv.adjoint()) < 1e-12);
    // The cascade contribution alone must also be traceless.
    const CMatrix no_input = qrp::master_rhs(on_space, h, cfg, false);
    CHECK(std::abs((deriv - no_input).trace()) < 1e-12);
  }
}

TEST_CASE("a lone excited mode decays at rate gamma toward the ground state") {
  ReservoirConfig cfg;
  cfg.N = 1;
  cfg.site_cutoff = 2;
  cfg.input_cutoffs = {2};
  cfg.E = Eigen::VectorXd::Zero(1);
  cfg.h = Eigen::MatrixXd::Zero(1, 1);
  cfg.Q = Eigen::VectorXd::Zero(1);
  cfg.W_in = Eigen::MatrixXd::Zero(1, 1);
  qrp::derive_input_rates(cfg);
  cfg.P = 0.0;
  cfg.gamma = 1.3;
  const HilbertSpace space = qrp::composite_space(cfg);
  // Input vacuum (x) site |1><1|.
  CMatrix rho = CMatrix::Zero(4, 4);
  rho(1, 1) = 1.0;
  const CMatrix deriv = qrp::master_rhs(
      DensityMatrix{space, rho}, qrp::build_hamiltonian(cfg, 0.0), cfg, false);
  CMatrix expected = CMatrix::Zero(4, 4);
  expected(0, 0) = cfg.gamma;
  expected(1, 1) = -cfg.gamma;
  CHECK(max_abs(deriv - expected) < 1e-12);
}

TEST_CASE("sparse evaluator reproduces the dense right-hand side") {
  for (std::uint64_t seed : {6, 7}) {
    ReservoirConfig cfg = tiny_config(2, 3, 2, seed);
    qrp::Rng rng(seed + 20);
    qrp::randomize_couplings(cfg, 0.9, rng);
    const HilbertSpace space = qrp::composite_space(cfg);
    const int dim = static_cast<int>(space.total_dim());
    const double u = 0.7;
    qrp::MasterOps ops(cfg, true);
    ops.set_drive(cfg.P + cfg.W * u);
    const qrp::Operator h = qrp::build_hamiltonian(cfg, u);
    for (int rep = 0; rep < 3; ++rep) {
      const DensityMatrix rho =
          qrp::random_state(dim, 400 + rep, qrp::StateKind::kMixed);
      CMatrix fast(dim, dim);
      ops.eval(rho.mat, fast);
      const CMatrix slow =
          qrp::master_rhs(DensityMatrix{space, rho.mat}, h, cfg, true);
      CHECK(max_abs(fast - slow) < 1e-10);
    }
  }
}

TEST_CASE("vacuum with every drive off is a fixed point") {
  ReservoirConfig cfg = tiny_config(2, 2, 2, 8);
  cfg.P = 0.0;
  cfg.W = 0.0;
  const DensityMatrix vac = qrp::vacuum_state(qrp::composite_space(cfg));
  const DensityMatrix evolved = qrp::integrate(vac, cfg, 0.0, 3.0, true);
  CHECK(max_abs(evolved.mat - vac.mat) < 1e-12);
}

TEST_CASE("integration matches the exponential of the vectorized generator") {
  for (std::uint64_t seed : {9, 10}) {
    ReservoirConfig cfg = tiny_config(2, 2, 3, seed);  // dim 12
    qrp::Rng rng(seed + 30);
    qrp::randomize_couplings(cfg, 0.5, rng);
    const HilbertSpace space = qrp::composite_space(cfg);
    const int dim = static_cast<int>(space.total_dim());
    const DensityMatrix rho0 =
        qrp::random_state(dim, seed + 40, qrp::StateKind::kMixed);
    DensityMatrix start{space, rho0.mat};
    const double u = 0.25;
    const DensityMatrix integrated = qrp::integrate(start, cfg, u, 5.0, true);
    const CMatrix exact = exact_evolution(cfg, rho0.mat, u, 5.0, true);
    CHECK(qrp::trace_distance(integrated.mat, exact) < 1e-8);
    CHECK(std::abs(integrated.mat.trace().real() - 1.0) < 1e-9);
  }
}

TEST_CASE("halving the step shrinks the integration error at fourth order") {
  ReservoirConfig cfg = tiny_config(1, 3, 2, 11);
  qrp::Rng rng(60);
  qrp::randomize_couplings(cfg, 0.4, rng);
  const HilbertSpace space = qrp::composite_space(cfg);
  const int dim = static_cast<int>(space.total_dim());
  const DensityMatrix rho0 =
      qrp::random_state(dim, 61, qrp::StateKind::kMixed);
  DensityMatrix start{space, rho0.mat};
  const double u = 0.5;
  const double t = 2.0;
  const CMatrix exact = exact_evolution(cfg, rho0.mat, u, t, true);

  cfg.step = 0.2;
  const double err_coarse =
      qrp::trace_distance(qrp::integrate(start, cfg, u, t, true).mat, exact);
  cfg.step = 0.1;
  const double err_fine =
      qrp::trace_distance(qrp::integrate(start, cfg, u, t, true).mat, exact);
  CHECK(err_fine * 8.0 <= err_coarse);
}

TEST_CASE("stability cap shrinks with the drive amplitude") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 12);
  qrp::MasterOps ops(cfg, true);
  const double cap0 = ops.stable_step(0.0);
  const double cap_strong = ops.stable_step(10.0);
  CHECK(cap0 > 0.0);
  CHECK(cap_strong < cap0);
  CHECK(ops.stable_step(2.0) <= ops.stable_step(1.0));
}

TEST_CASE("warmup without drive stays in vacuum and is exactly steady") {
  ReservoirConfig cfg = tiny_config(2, 2, 2, 13);
  cfg.P = 0.0;
  double residual = 1.0;
  const DensityMatrix rho = qrp::warmup(cfg, &residual);
  CHECK(max_abs(rho.mat - qrp::vacuum_state(qrp::composite_space(cfg)).mat) <
        1e-12);
  CHECK(residual < 1e-12);
}

TEST_CASE("weakly driven warmup reaches a steady state") {
  ReservoirConfig cfg = tiny_config(3, 3, 2, 14);
  cfg.P = 0.1;
  double residual = 1.0;
  const DensityMatrix rho = qrp::warmup(cfg, &residual);
  CHECK(residual < 1e-3);
  rho.validate(1e-7);
}

TEST_CASE("warmup result is stable under step halving") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 15);
  cfg.P = 0.1;
  cfg.step = 0.02;
  const DensityMatrix coarse = qrp::warmup(cfg);
  cfg.step = 0.01;
  const DensityMatrix fine = qrp::warmup(cfg);
  CHECK(max_abs(coarse.mat - fine.mat) < 1e-7);
}

TEST_CASE("injection replaces the input marginal and keeps the rest") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 16);
  const HilbertSpace space = qrp::composite_space(cfg);
  const int dim = static_cast<int>(space.total_dim());
  const DensityMatrix joint =
      qrp::random_state(dim, 70, qrp::StateKind::kMixed);
  DensityMatrix rho{space, joint.mat};
  const DensityMatrix beta = qrp::random_state(2, 71, qrp::StateKind::kMixed);
  DensityMatrix beta_in{qrp::input_space(cfg), beta.mat};

  std::vector<int> sites;
  for (int m = cfg.n_inputs(); m < space.modes(); ++m) sites.push_back(m);
  const CMatrix before = qrp::partial_trace(rho, sites).mat;
  const DensityMatrix injected = qrp::inject(rho, beta_in);
  const CMatrix after = qrp::partial_trace(injected, sites).mat;
  CHECK(max_abs(before - after) < 1e-12);
  const CMatrix input_marg = qrp::partial_trace(injected, {0}).mat;
  CHECK(max_abs(input_marg - beta.mat) < 1e-12);
  CHECK(std::abs(injected.mat.trace().real() - 1.0) < 1e-12);
}

TEST_CASE("feature rows carry N*V readouts plus a bias of one") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 17);
  qrp::HybridSequence seq;
  for (int l = 0; l < 6; ++l) {
    seq.u.push_back(0.1 * l);
    seq.beta.push_back(qrp::random_state(2, 80 + l, qrp::StateKind::kPure));
  }
  qrp::PhysicalityStats stats;
  const qrp::FeatureMatrix fm = qrp::run_sequence(cfg, seq, &stats);
  CHECK(fm.X.rows() == 6);
  CHECK(fm.X.cols() == cfg.N * cfg.V + 1);
  CHECK(fm.feature_count() == cfg.N * cfg.V);
  CHECK((fm.X.col(cfg.N * cfg.V).array() == 1.0).all());
  CHECK(fm.X.allFinite());
  CHECK(stats.measurements == 6 * cfg.V);
}

TEST_CASE("steady vacuum driving makes consecutive feature rows identical") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 18);
  qrp::HybridSequence seq;
  const DensityMatrix vac = qrp::vacuum_state(qrp::input_space(cfg));
  for (int l = 0; l < 30; ++l) {
    seq.u.push_back(0.0);
    seq.beta.push_back(vac);
  }
  const qrp::FeatureMatrix fm = qrp::run_sequence(cfg, seq);
  for (int l = 20; l + 1 < 30; ++l) {
    CHECK((fm.X.row(l) - fm.X.row(l + 1)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("feature extraction is bitwise deterministic") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 19);
  qrp::HybridSequence seq;
  for (int l = 0; l < 8; ++l) {
    seq.u.push_back(std::sin(0.7 * l));
    seq.beta.push_back(qrp::random_state(2, 90 + l, qrp::StateKind::kPure));
  }
  const qrp::FeatureMatrix a = qrp::run_sequence(cfg, seq);
  const qrp::FeatureMatrix b = qrp::run_sequence(cfg, seq);
  CHECK((a.X.array() == b.X.array()).all());
}

TEST_CASE("recorded states stay physical along a driven run") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 20);
  qrp::HybridSequence seq;
  for (int l = 0; l < 20; ++l) {
    seq.u.push_back(l % 2 == 0 ? 1.0 : -1.0);
    seq.beta.push_back(qrp::random_state(2, 100 + l, qrp::StateKind::kPure));
  }
  qrp::PhysicalityStats stats;
  qrp::run_sequence(cfg, seq, &stats);
  CHECK(stats.max_trace_drift <= 1e-9 * stats.total_time);
  CHECK(stats.psd_violations == 0);
  CHECK(stats.worst_negative_eig >= -1e-7);
}

TEST_CASE("different initial states forget their history under driving") {
  // Echo-state property at the default operating point.
  ReservoirConfig cfg = tiny_config(2, 3, 2, 21);
  cfg.P = 0.1;
  cfg.W = 1.0;
  qrp::ReservoirSimulator sim_a(cfg);
  qrp::ReservoirSimulator sim_b(cfg);
  // Perturb the second simulator's starting point toward a random state.
  const HilbertSpace space = qrp::composite_space(cfg);
  const int dim = static_cast<int>(space.total_dim());
  const DensityMatrix rand_state =
      qrp::random_state(dim, 110, qrp::StateKind::kMixed);
  CMatrix mixed = 0.5 * sim_b.state().mat + 0.5 * rand_state.mat;
  sim_b.set_state(DensityMatrix{space, mixed});

  qrp::Rng rng(111);
  double worst_tail = 0.0;
  double first_step_gap = 0.0;
  for (int l = 0; l < 50; ++l) {
    const double u = rng.uniform(-1.0, 1.0);
    const DensityMatrix beta =
        qrp::random_state(2, 120 + l, qrp::StateKind::kPure);
    const Eigen::VectorXd fa = sim_a.step(u, beta);
    const Eigen::VectorXd fb = sim_b.step(u, beta);
    const double gap = (fa - fb).cwiseAbs().maxCoeff();
    if (l == 0) first_step_gap = gap;
    if (l >= 20) worst_tail = std::max(worst_tail, gap);
  }
  CHECK(first_step_gap > 1e-4);  // the perturbation was visible
  CHECK(worst_tail < 1e-4);      // and forgotten
}

TEST_CASE("strict cutoff policy raises and auto policy recovers") {
  ReservoirConfig cfg = tiny_config(1, 2, 2, 22);
  cfg.P = 0.1;  // needs three site levels to keep the top level quiet
  cfg.cutoff_policy = qrp::CutoffPolicy::kStrict;
  qrp::HybridSequence seq;
  const DensityMatrix vac = qrp::vacuum_state(qrp::input_space(cfg));
  for (int l = 0; l < 4; ++l) {
    seq.u.push_back(0.0);
    seq.beta.push_back(vac);
  }
  CHECK_THROWS_AS(qrp::run_sequence(cfg, seq), qrp::CutoffError);

  cfg.cutoff_policy = qrp::CutoffPolicy::kAutoRaise;
  qrp::PhysicalityStats stats;
  const qrp::FeatureMatrix fm = qrp::run_sequence(cfg, seq, &stats);
  CHECK(stats.cutoff_raises >= 1);
  CHECK(fm.X.allFinite());

  cfg.cutoff_policy = qrp::CutoffPolicy::kWarn;
  qrp::PhysicalityStats warn_stats;
  qrp::run_sequence(cfg, seq, &warn_stats);
  CHECK(warn_stats.max_top_population > cfg.cutoff_tol);
}

TEST_CASE("coupling randomization follows the documented ranges") {
  ReservoirConfig cfg;
  cfg.N = 6;
  cfg.site_cutoff = 2;
  cfg.input_cutoffs = {2, 2};
  cfg.gamma = 2.0;
  qrp::Rng rng(23);
  qrp::randomize_couplings(cfg, 1.3, rng);
  CHECK(cfg.E.size() == 6);
  CHECK(cfg.E.cwiseAbs().maxCoeff() == 0.0);
  CHECK((cfg.Q.array() == 1.3).all());
  CHECK(cfg.W_in.rows() == 6);
  CHECK(cfg.W_in.cols() == 2);
  CHECK(cfg.W_in.minCoeff() >= 0.0);
  CHECK(cfg.W_in.maxCoeff() <= cfg.gamma);
  CHECK(max_abs(CMatrix((cfg.h - cfg.h.transpose()).cast<complexd>())) == 0.0);
  for (int k = 0; k < 2; ++k) {
    const double expected = cfg.W_in.col(k).squaredNorm() / cfg.gamma;
    CHECK(std::abs(cfg.gamma_k(k) - expected) < 1e-15);
  }
  // Hopping lives only on lattice bonds.
  const auto bonds = qrp::lattice_bonds(6);
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(6, 6);
  for (const auto& [i, j] : bonds) {
    mask(i, j) = 1.0;
    mask(j, i) = 1.0;
  }
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (mask(i, j) == 0.0) CHECK(cfg.h(i, j) == 0.0);
      if (mask(i, j) == 1.0 && i < j) {
        CHECK(cfg.h(i, j) >= 0.0);
        CHECK(cfg.h(i, j) <= cfg.gamma);
      }
    }
  }
}

TEST_CASE("lattice bonds form the most-square grid") {
  // N = 3: 1 x 3 chain.
  const auto chain = qrp::lattice_bonds(3);
  CHECK(chain.size() == 2);
  // N = 4: 2 x 2 square with four edges.
  const auto square = qrp::lattice_bonds(4);
  CHECK(square.size() == 4);
  // N = 6: 2 x 3 grid with seven edges.
  const auto grid = qrp::lattice_bonds(6);
  CHECK(grid.size() == 7);
  // N = 1: no bonds.
  CHECK(qrp::lattice_bonds(1).empty());
}

TEST_CASE("config validation lists violations") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 24);
  cfg.V = 0;
  cfg.tau = -1.0;
  CHECK_THROWS_AS(qrp::validate_config(cfg), std::invalid_argument);
  try {
    qrp::validate_config(cfg);
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    CHECK(what.find("V") != std::string::npos);
    CHECK(what.find("tau") != std::string::npos);
  }
}

TEST_CASE("site occupations read the diagonal number expectations") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 25);
  const HilbertSpace space = qrp::composite_space(cfg);
  const DensityMatrix vac = qrp::vacuum_state(space);
  CHECK(qrp::site_occupations(vac.mat, cfg).cwiseAbs().maxCoeff() < 1e-14);

  // Put one excitation in the first site (mode index 1 after the input).
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(space.total_dim());
  psi(space.stride(1)) = 1.0;  // level 1 of mode 1
  const DensityMatrix one = qrp::pure_state(space, psi);
  const Eigen::VectorXd occ = qrp::site_occupations(one.mat, cfg);
  CHECK(std::abs(occ(0) - 1.0) < 1e-12);
  CHECK(std::abs(occ(1)) < 1e-12);
}

TEST_CASE("simulator steps advance time and keep the state valid") {
  ReservoirConfig cfg = tiny_config(2, 3, 2, 26);
  qrp::ReservoirSimulator sim(cfg);
  const double t0 = sim.elapsed();
  CHECK(t0 == doctest::Approx(cfg.t_init));
  const DensityMatrix beta = qrp::random_state(2, 130, qrp::StateKind::kPure);
  const Eigen::VectorXd f = sim.step(0.5, beta);
  CHECK(f.size() == cfg.N * cfg.V);
  CHECK(sim.elapsed() == doctest::Approx(cfg.t_init + cfg.tau));
  sim.state().validate(1e-6);
  const DensityMatrix marg = sim.input_marginal();
  CHECK(marg.mat.rows() == 2);
  const DensityMatrix site_marg = sim.site_marginal();
  CHECK(site_marg.mat.rows() == 9);
}
