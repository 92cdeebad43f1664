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

#include "qrp/states.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qrp/rng.hpp"

namespace qrp {

double fidelity(const CMatrix& rho, const CMatrix& sigma, double psd_tol) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols() ||
      rho.rows() != rho.cols()) {
    throw std::invalid_argument("fidelity: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es_s(hermitize(sigma));
  const double min_s = es_s.eigenvalues().minCoeff();
  if (min_s < -psd_tol) {
    throw std::invalid_argument("fidelity: input not PSD (eigenvalue " +
                                std::to_string(min_s) + ")");
  }
  const CMatrix sq = es_s.eigenvectors() *
                     es_s.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                     es_s.eigenvectors().adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es_m(hermitize(sq * rho * sq),
                                              Eigen::EigenvaluesOnly);
  const double min_m = es_m.eigenvalues().minCoeff();
  if (min_m < -psd_tol) {
    throw std::invalid_argument("fidelity: input not PSD (inner eigenvalue " +
                                std::to_string(min_m) + ")");
  }
  return es_m.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

double bures_angle(const CMatrix& rho, const CMatrix& sigma, double psd_tol) {
  return std::acos(std::clamp(fidelity(rho, sigma, psd_tol), 0.0, 1.0));
}

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<double> sorted(v.data(), v.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumsum = 0.0;
  double theta = 0.0;
  int support = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumsum += sorted[static_cast<std::size_t>(k)];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - t > 0.0) {
      theta = t;
      support = static_cast<int>(k + 1);
    }
  }
  if (support == 0) {
    throw std::logic_error("project_simplex: empty support");
  }
  return (v.array() - theta).cwiseMax(0.0);
}

DensityMatrix project_spectrahedron(const CMatrix& hermitian,
                                    const HilbertSpace& space) {
  if (hermitian.rows() != space.total_dim() ||
      hermitian.cols() != space.total_dim()) {
    throw std::invalid_argument("project_spectrahedron: shape mismatch");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(hermitian));
  const Eigen::VectorXd p = project_simplex(es.eigenvalues());
  CMatrix m = es.eigenvectors() * p.asDiagonal() * es.eigenvectors().adjoint();
  return {space, hermitize(m)};
}

DensityMatrix thermal_state(int dim, double nbar) {
  if (dim < 1) throw std::invalid_argument("thermal_state: dim < 1");
  if (nbar < 0.0) throw std::invalid_argument("thermal_state: nbar < 0");
  CMatrix m = CMatrix::Zero(dim, dim);
  if (nbar == 0.0) {
    m(0, 0) = 1.0;
  } else {
    const double r = nbar / (1.0 + nbar);
    double w = 1.0;
    double norm = 0.0;
    for (int n = 0; n < dim; ++n, w *= r) {
      m(n, n) = w;
      norm += w;
    }
    m /= norm;
  }
  return {HilbertSpace({dim}), std::move(m)};
}

CMatrix squeeze_operator(int dim, complexd xi) {
  CMatrix ad2 = CMatrix::Zero(dim, dim);
  // a^dag a^dag |n> = sqrt((n+1)(n+2)) |n+2>
  for (int n = 0; n + 2 < dim; ++n) {
    ad2(n + 2, n) = std::sqrt(static_cast<double>((n + 1) * (n + 2)));
  }
  const CMatrix g = xi * ad2 - std::conj(xi) * ad2.adjoint();
  // g is anti-Hermitian, so -i*g is Hermitian and exp(g) = exp(i*(-i*g)) is
  // exactly unitary on the truncated space.
  const CMatrix h = complexd(0.0, -1.0) * g;
  return unitary_exp_i(h);
}

DensityMatrix random_state(int dim, std::uint64_t seed, StateKind kind) {
  if (dim < 1) throw std::invalid_argument("random_state: dim < 1");
  Rng rng(seed);
  HilbertSpace space({dim});
  if (kind == StateKind::kPure) {
    Eigen::VectorXcd psi(dim);
    for (int i = 0; i < dim; ++i) psi(i) = rng.complex_normal();
    return pure_state(space, psi);
  }
  CMatrix g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) g(i, j) = rng.complex_normal();
  }
  CMatrix w = g * g.adjoint();
  w /= w.trace().real();
  return {space, std::move(w)};
}

}  // namespace qrp
