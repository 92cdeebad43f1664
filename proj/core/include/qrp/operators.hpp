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
#include <complex>
#include <vector>

#include "qrp/hilbert.hpp"

namespace qrp {

using complexd = std::complex<double>;
// Row-major so the propagation kernels can stream matrix rows.
using CMatrix =
    Eigen::Matrix<complexd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Tolerances for density-matrix invariants.
inline constexpr double kHermitianTol = 1e-9;
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kEigenvalueTol = 1e-9;

struct Operator {
  HilbertSpace space;
  CMatrix mat;
};

// Trace-one Hermitian positive matrix on a composite Fock space.
struct DensityMatrix {
  HilbertSpace space;
  CMatrix mat;

  double trace_real() const { return mat.trace().real(); }
  // Throws std::invalid_argument if Hermiticity/trace/positivity are violated
  // beyond the module tolerances (positivity check costs an eigensolve).
  void validate(double eig_tol = kEigenvalueTol) const;
};

// Vacuum state |0...0><0...0|.
DensityMatrix vacuum_state(const HilbertSpace& space);

// Density matrix from a (not necessarily normalized) pure state vector.
DensityMatrix pure_state(const HilbertSpace& space,
                         const Eigen::VectorXcd& psi);

// Lowering operator of one mode embedded in the composite space.
Operator annihilator(const HilbertSpace& space, int mode);
// c^dag c of one mode (diagonal).
Operator number_operator(const HilbertSpace& space, int mode);
Operator identity_operator(const HilbertSpace& space);

CMatrix kron(const CMatrix& a, const CMatrix& b);

// Partial trace keeping `keep` (strictly increasing mode indices).
// Implemented with stride arithmetic; the naive index-loop version lives in
// the tests as an oracle.
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep);
CMatrix partial_trace(const CMatrix& mat, const HilbertSpace& space,
                      const std::vector<int>& keep);

// (M + M^dag)/2.
CMatrix hermitize(const CMatrix& m);

// Principal square root of a Hermitian PSD matrix; eigenvalues below zero are
// clipped (inputs are physical up to roundoff).
CMatrix hermitian_sqrt(const CMatrix& m);

// exp(i*H) for Hermitian H; exactly unitary by construction.
CMatrix unitary_exp_i(const CMatrix& h);

// 0.5 * sum |eig(a - b)|.
double trace_distance(const CMatrix& a, const CMatrix& b);

}  // namespace qrp
