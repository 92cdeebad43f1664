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

#include "qrp/readout.hpp"

#include <cmath>
#include <stdexcept>

#include "qrp/rng.hpp"
#include "qrp/states.hpp"

namespace qrp {

double default_ridge_eta(const Eigen::MatrixXd& x) {
  const double k = std::max<double>(1.0, static_cast<double>(x.cols() - 1));
  return 1e-6 * x.squaredNorm() / k;
}

ReadoutWeights ridge_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                         double eta) {
  if (x.rows() < 1 || x.rows() != y.rows()) {
    throw std::invalid_argument("ridge_fit: row count mismatch");
  }
  if (eta < 0.0) throw std::invalid_argument("ridge_fit: eta must be >= 0");

  const Eigen::MatrixXd gram =
      x.transpose() * x +
      eta * Eigen::MatrixXd::Identity(x.cols(), x.cols());
  const Eigen::MatrixXd rhs = x.transpose() * y;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  Eigen::MatrixXd w = ldlt.solve(rhs);

  if (!w.allFinite()) {
    throw std::runtime_error(
        "ridge_fit: normal equations are singular; supply eta > 0");
  }
  if (eta == 0.0) {
    const double residual = (gram * w - rhs).norm();
    if (residual > 1e-8 * std::max(rhs.norm(), 1.0)) {
      throw std::runtime_error(
          "ridge_fit: normal equations are singular; supply eta > 0");
    }
  }
  return ReadoutWeights{std::move(w), eta};
}

Eigen::VectorXd vectorize_density(const CMatrix& m) {
  const int d = static_cast<int>(m.rows());
  Eigen::VectorXd y(2 * d * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      y[i * d + j] = m(i, j).real();
      y[d * d + i * d + j] = m(i, j).imag();
    }
  }
  return y;
}

DensityMatrix reconstruct_density(const Eigen::VectorXd& y, int D) {
  if (y.size() != 2 * D * D) {
    throw std::invalid_argument(
        "reconstruct_density: need 2 D^2 stacked real entries");
  }
  CMatrix m(D, D);
  for (int i = 0; i < D; ++i) {
    for (int j = 0; j < D; ++j) {
      m(i, j) = complexd(y[i * D + j], y[D * D + i * D + j]);
    }
  }
  return project_spectrahedron(hermitize(m), HilbertSpace({D}));
}

int quantize_symbol(double y) {
  if (y <= -2.0) return -3;
  if (y <= 0.0) return -1;
  if (y <= 2.0) return 1;
  return 3;
}

ClosedLoopResult closed_loop_generate(
    ReservoirSimulator& sim, const ReadoutWeights& predictor,
    const ReadoutWeights* tomography_head,
    const std::function<DensityMatrix(int)>& beta_source,
    const ClosedLoopOptions& opts) {
  if (opts.steps < 1) {
    throw std::invalid_argument("closed_loop_generate: steps must be >= 1");
  }
  if (predictor.W_out.cols() != 1) {
    throw std::invalid_argument(
        "closed_loop_generate: predictor must have one output");
  }

  ClosedLoopResult result;
  result.u_fed.reserve(opts.steps);
  result.predictions.reserve(opts.steps);
  if (tomography_head) {
    result.tomography.resize(opts.steps, tomography_head->W_out.cols());
  }

  const int k = static_cast<int>(predictor.W_out.rows());
  Eigen::VectorXd features_with_bias(k);
  features_with_bias[k - 1] = 1.0;

  double next_u = opts.initial_u;
  for (int step = 0; step < opts.steps; ++step) {
    double u = next_u;
    if (opts.intervention_step && *opts.intervention_step == step) {
      u = opts.override_value ? *opts.override_value
                              : u + opts.perturbation;
    }
    const Eigen::VectorXd f = sim.step(u, beta_source(step));
    if (f.size() != k - 1) {
      throw std::invalid_argument(
          "closed_loop_generate: feature width does not match weights");
    }
    features_with_bias.head(k - 1) = f;

    const double pred = predictor.apply(features_with_bias)[0];
    if (std::abs(pred) > opts.divergence_guard) {
      throw std::runtime_error(
          "closed_loop_generate: prediction diverged beyond the guard");
    }
    if (tomography_head) {
      result.tomography.row(step) =
          tomography_head->apply(features_with_bias).transpose();
    }
    result.u_fed.push_back(u);
    result.predictions.push_back(pred);
    next_u = pred;
  }
  return result;
}

FeatureMatrix esn_run(const EsnConfig& cfg, const std::vector<double>& u_seq) {
  if (cfg.nodes < 1) throw std::invalid_argument("esn_run: nodes must be >= 1");
  if (cfg.spectral_radius <= 0.0 || cfg.spectral_radius >= 1.0) {
    throw std::invalid_argument("esn_run: spectral radius must be in (0, 1)");
  }

  const int n = cfg.nodes;
  Eigen::VectorXd w_in(n);
  Eigen::MatrixXd w(n, n);

  // Redraw deterministically until the sampled recurrent matrix has a usable
  // spectral radius to rescale.
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(cfg.seed, attempt));
    for (int i = 0; i < n; ++i) {
      w_in[i] = cfg.input_scale * rng.uniform(-1.0, 1.0);
    }
    w.setZero();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (rng.uniform() < cfg.connection_probability) {
          w(i, j) = rng.uniform(-1.0, 1.0);
        }
      }
    }
    const double radius =
        Eigen::EigenSolver<Eigen::MatrixXd>(w, false)
            .eigenvalues()
            .cwiseAbs()
            .maxCoeff();
    if (radius > 1e-12) {
      w *= cfg.spectral_radius / radius;
      break;
    }
  }

  const int rows = static_cast<int>(u_seq.size());
  FeatureMatrix features;
  features.N = n;
  features.V = 1;
  features.X.resize(rows, n + 1);
  Eigen::VectorXd state = Eigen::VectorXd::Zero(n);
  for (int l = 0; l < rows; ++l) {
    state = (w_in * u_seq[l] + w * state).array().tanh();
    features.X.row(l).head(n) = state;
    features.X(l, n) = 1.0;
  }
  return features;
}

}  // namespace qrp
