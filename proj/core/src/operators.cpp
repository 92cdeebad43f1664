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

#include "qrp/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace qrp {

void DensityMatrix::validate(double eig_tol) const {
  if (mat.rows() != space.total_dim() || mat.cols() != space.total_dim()) {
    throw std::invalid_argument("DensityMatrix: shape does not match space");
  }
  const double herm = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTol) {
    throw std::invalid_argument("DensityMatrix: not Hermitian (residual " +
                                std::to_string(herm) + ")");
  }
  const double tr_err = std::abs(mat.trace() - complexd(1.0, 0.0));
  if (tr_err > kTraceTol) {
    throw std::invalid_argument("DensityMatrix: trace deviates by " +
                                std::to_string(tr_err));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(mat, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -eig_tol) {
    throw std::invalid_argument("DensityMatrix: eigenvalue " +
                                std::to_string(min_eig) + " below -tolerance");
  }
}

DensityMatrix vacuum_state(const HilbertSpace& space) {
  CMatrix m = CMatrix::Zero(space.total_dim(), space.total_dim());
  m(0, 0) = 1.0;
  return {space, std::move(m)};
}

DensityMatrix pure_state(const HilbertSpace& space,
                         const Eigen::VectorXcd& psi) {
  if (psi.size() != space.total_dim()) {
    throw std::invalid_argument("pure_state: vector does not match space");
  }
  const double n2 = psi.squaredNorm();
  if (n2 <= 0.0) throw std::invalid_argument("pure_state: zero vector");
  CMatrix m = (psi * psi.adjoint()) / n2;
  return {space, std::move(m)};
}

Operator annihilator(const HilbertSpace& space, int mode) {
  if (mode < 0 || mode >= space.modes()) {
    throw std::invalid_argument("annihilator: mode out of range");
  }
  const long dim = space.total_dim();
  const long stride = space.stride(mode);
  const int d = space.dim(mode);
  CMatrix m = CMatrix::Zero(dim, dim);
  // <..., n-1, ...| a |..., n, ...> = sqrt(n)
  for (long idx = 0; idx < dim; ++idx) {
    const int n = space.level_of(idx, mode);
    if (n > 0) m(idx - stride, idx) = std::sqrt(static_cast<double>(n));
  }
  return {space, std::move(m)};
}

Operator number_operator(const HilbertSpace& space, int mode) {
  const long dim = space.total_dim();
  CMatrix m = CMatrix::Zero(dim, dim);
  for (long idx = 0; idx < dim; ++idx) {
    m(idx, idx) = static_cast<double>(space.level_of(idx, mode));
  }
  return {space, std::move(m)};
}

Operator identity_operator(const HilbertSpace& space) {
  return {space, CMatrix::Identity(space.total_dim(), space.total_dim())};
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix partial_trace(const CMatrix& mat, const HilbertSpace& space,
                      const std::vector<int>& keep) {
  const int n_modes = space.modes();
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 0 || keep[i] >= n_modes ||
        (i > 0 && keep[i] <= keep[i - 1])) {
      throw std::invalid_argument("partial_trace: keep list invalid");
    }
  }
  if (mat.rows() != space.total_dim() || mat.cols() != space.total_dim()) {
    throw std::invalid_argument("partial_trace: matrix does not match space");
  }

  std::vector<int> traced;
  for (int m = 0; m < n_modes; ++m) {
    bool kept = false;
    for (int k : keep) kept |= (k == m);
    if (!kept) traced.push_back(m);
  }

  long keep_dim = 1, traced_dim = 1;
  for (int m : keep) keep_dim *= space.dim(m);
  for (int m : traced) traced_dim *= space.dim(m);

  // Composite index = sum over kept modes of level*stride + same for traced.
  // Enumerate both groups and accumulate the diagonal over the traced group.
  std::vector<long> keep_offsets(static_cast<std::size_t>(keep_dim), 0);
  {
    std::vector<int> levels(keep.size(), 0);
    for (long r = 0; r < keep_dim; ++r) {
      long off = 0;
      for (std::size_t i = 0; i < keep.size(); ++i) {
        off += static_cast<long>(levels[i]) * space.stride(keep[i]);
      }
      keep_offsets[static_cast<std::size_t>(r)] = off;
      for (std::size_t i = keep.size(); i-- > 0;) {
        if (++levels[i] < space.dim(keep[i])) break;
        levels[i] = 0;
      }
    }
  }
  std::vector<long> traced_offsets(static_cast<std::size_t>(traced_dim), 0);
  {
    std::vector<int> levels(traced.size(), 0);
    for (long t = 0; t < traced_dim; ++t) {
      long off = 0;
      for (std::size_t i = 0; i < traced.size(); ++i) {
        off += static_cast<long>(levels[i]) * space.stride(traced[i]);
      }
      traced_offsets[static_cast<std::size_t>(t)] = off;
      for (std::size_t i = traced.size(); i-- > 0;) {
        if (++levels[i] < space.dim(traced[i])) break;
        levels[i] = 0;
      }
    }
  }

  CMatrix out = CMatrix::Zero(keep_dim, keep_dim);
  for (long r = 0; r < keep_dim; ++r) {
    for (long c = 0; c < keep_dim; ++c) {
      complexd acc(0.0, 0.0);
      const long ro = keep_offsets[static_cast<std::size_t>(r)];
      const long co = keep_offsets[static_cast<std::size_t>(c)];
      for (long t = 0; t < traced_dim; ++t) {
        const long to = traced_offsets[static_cast<std::size_t>(t)];
        acc += mat(ro + to, co + to);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& keep) {
  std::vector<int> dims;
  for (int m : keep) dims.push_back(rho.space.dim(m));
  return {HilbertSpace(dims), partial_trace(rho.mat, rho.space, keep)};
}

CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

CMatrix hermitian_sqrt(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() *
         es.eigenvectors().adjoint();
}

CMatrix unitary_exp_i(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases(i) = std::exp(complexd(0.0, es.eigenvalues()(i)));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(a - b),
                                            Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace qrp
