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

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "qrp/readout.hpp"
#include "qrp/reservoir.hpp"
#include "qrp/rng.hpp"
#include "qrp/states.hpp"
#include "qrp/tasks.hpp"
#include "qrp/wigner.hpp"

namespace {

qrp::ReservoirConfig switch_config() {
  qrp::ReservoirConfig cfg;
  cfg.N = 3;
  cfg.site_cutoff = 3;
  cfg.input_cutoffs = {2};
  cfg.P = 0.1;
  cfg.W = 1.0;
  cfg.V = 8;
  cfg.step = 0.02;
  qrp::Rng rng(11);
  qrp::randomize_couplings(cfg, 0.0, rng);
  return cfg;
}

qrp::ReservoirConfig closed_loop_config() {
  qrp::ReservoirConfig cfg;
  cfg.N = 3;
  cfg.site_cutoff = 3;
  cfg.input_cutoffs = {9};
  cfg.P = 1.0;
  cfg.W = 0.8;
  cfg.V = 10;
  cfg.step = 0.02;
  qrp::Rng rng(12);
  qrp::randomize_couplings(cfg, 0.0, rng);
  return cfg;
}

// One right-hand-side evaluation of the master equation (dim 54).
void BM_MasterRhsDim54(benchmark::State& state) {
  const qrp::ReservoirConfig cfg = switch_config();
  qrp::MasterOps ops(cfg, true);
  ops.set_drive(cfg.P + cfg.W * 1.5);
  const qrp::HilbertSpace space = qrp::composite_space(cfg);
  qrp::CMatrix rho = qrp::vacuum_state(space).mat;
  qrp::CMatrix out = rho;
  for (auto _ : state) {
    ops.eval(rho, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_MasterRhsDim54);

// Same with a nine-level input mode attached (dim 243).
void BM_MasterRhsDim243(benchmark::State& state) {
  const qrp::ReservoirConfig cfg = closed_loop_config();
  qrp::MasterOps ops(cfg, true);
  ops.set_drive(cfg.P + cfg.W * 0.5);
  const qrp::HilbertSpace space = qrp::composite_space(cfg);
  qrp::CMatrix rho = qrp::vacuum_state(space).mat;
  qrp::CMatrix out = rho;
  for (auto _ : state) {
    ops.eval(rho, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_MasterRhsDim243);

// A full input interval: inject, drive for tau, read N*V occupations.
void BM_IntervalStep(benchmark::State& state) {
  qrp::ReservoirSimulator sim(switch_config());
  const qrp::DensityMatrix beta =
      qrp::random_state(2, 77, qrp::StateKind::kPure);
  double u = 0.3;
  for (auto _ : state) {
    Eigen::VectorXd feats = sim.step(u, beta);
    benchmark::DoNotOptimize(feats.data());
    u = -u;
  }
}
BENCHMARK(BM_IntervalStep);

// Phase-space evaluation of one state over the standard 61 x 61 grid.
void BM_WignerGrid(benchmark::State& state) {
  const qrp::WignerBasis basis = qrp::WignerBasis::standard(4);
  const qrp::DensityMatrix rho =
      qrp::random_state(4, 5, qrp::StateKind::kMixed);
  for (auto _ : state) {
    Eigen::VectorXd w = basis.evaluate_flat(rho.mat);
    benchmark::DoNotOptimize(w.data());
  }
}
BENCHMARK(BM_WignerGrid);

// Ridge regression at the equalizer task's typical shape.
void BM_RidgeFit(benchmark::State& state) {
  qrp::Rng rng(3);
  Eigen::MatrixXd x(1000, 25);
  Eigen::MatrixXd y(1000, 4);
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols() - 1; ++j) x(i, j) = rng.normal();
    x(i, x.cols() - 1) = 1.0;
    for (int j = 0; j < y.cols(); ++j) y(i, j) = rng.normal();
  }
  for (auto _ : state) {
    qrp::ReadoutWeights w = qrp::ridge_fit(x, y, 1e-6);
    benchmark::DoNotOptimize(w.W_out.data());
  }
}
BENCHMARK(BM_RidgeFit);

// Equalizer stream generation (filter + distortion + noise).
void BM_EqualizerData(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) {
    qrp::EqualizerData data = qrp::gen_equalizer_data(1000, seed++, 24.0);
    benchmark::DoNotOptimize(data.u.data());
  }
}
BENCHMARK(BM_EqualizerData);

}  // namespace

BENCHMARK_MAIN();
