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

#include <complex>
#include <cstdint>

#include "qrp/operators.hpp"

namespace qrp {

// Uhlmann fidelity tr sqrt(sqrt(sigma) rho sqrt(sigma)). Eigenvalues of the
// inner product more negative than -psd_tol raise; smaller negatives are
// clipped (integration leaves O(1e-8) dips).
double fidelity(const CMatrix& rho, const CMatrix& sigma,
                double psd_tol = 1e-7);
// arccos of fidelity clamped to [0, 1].
double bures_angle(const CMatrix& rho, const CMatrix& sigma,
                   double psd_tol = 1e-7);

// Nearest (Frobenius) trace-one PSD matrix: eigendecompose, project the
// spectrum onto the probability simplex by sort-and-threshold, reassemble.
DensityMatrix project_spectrahedron(const CMatrix& hermitian,
                                    const HilbertSpace& space);

// Euclidean projection of a real vector onto {p >= 0, sum p = 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

// Single-mode thermal state with mean occupation nbar, renormalized on the
// truncated space.
DensityMatrix thermal_state(int dim, double nbar);

// exp(xi a^dag a^dag - conj(xi) a a) on the truncated space. Note the
// quadratic generator carries no 1/2, so quadrature variances of the squeezed
// vacuum follow exp(+-4r)/2 for small r.
CMatrix squeeze_operator(int dim, complexd xi);

enum class StateKind { kPure, kMixed };

// Haar-random pure state or normalized-Wishart mixed state; deterministic
// per seed.
DensityMatrix random_state(int dim, std::uint64_t seed, StateKind kind);

}  // namespace qrp
