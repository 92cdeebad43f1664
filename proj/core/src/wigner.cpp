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

#include "qrp/wigner.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qrp {
namespace {

// Coefficients of W(alpha) as a linear functional of rho in row-major vec
// order: W = sum_{m,n} row[m*dim + n] * rho(m, n).  Derived from the
// displaced-parity form W = (2/pi) Tr[rho D(2 alpha) Pi] / 2 (x-p measure):
//   coeff(m, m+k) = pref * (-1)^m (2 alpha)^k sqrt(m!/(m+k)!) L_m^k(4|a|^2)
// with pref = exp(-2|alpha|^2)/pi and coeff(n, m) = conj(coeff(m, n)), so the
// accumulated sum is real for Hermitian rho.
void fill_kernel_row(int dim, complexd alpha, complexd* row) {
  const double z = 4.0 * std::norm(alpha);
  const double pref = std::exp(-2.0 * std::norm(alpha)) / M_PI;
  const complexd two_alpha = 2.0 * alpha;
  complexd alpha_pow = complexd(1.0, 0.0);  // (2 alpha)^k
  double rfac0 = 1.0;                       // 1/sqrt(k!)
  for (int k = 0; k < dim; ++k) {
    // Generalized Laguerre recurrence in m at fixed superscript k.
    double lag_prev = 0.0;
    double lag = 1.0;  // L_0^k
    double rfac = rfac0;
    for (int m = 0; m + k < dim; ++m) {
      const int n = m + k;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const complexd c = pref * sign * alpha_pow * rfac * lag;
      row[m * dim + n] = c;
      if (k > 0) row[n * dim + m] = std::conj(c);
      // Advance L_m^k -> L_{m+1}^k and sqrt(m!/(m+k)!) -> next m.
      const double lag_next =
          ((2.0 * m + 1.0 + k - z) * lag - (m + k) * lag_prev) / (m + 1.0);
      lag_prev = lag;
      lag = lag_next;
      rfac *= std::sqrt((m + 1.0) / (m + 1.0 + k));
    }
    alpha_pow *= two_alpha;
    rfac0 /= std::sqrt(k + 1.0);
  }
}

}  // namespace

Eigen::VectorXd linspace(double lo, double hi, int n) {
  if (n < 2) throw std::invalid_argument("linspace: need at least 2 points");
  Eigen::VectorXd out(n);
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo + i * step;
  out[n - 1] = hi;  // endpoints exact
  return out;
}

WignerBasis::WignerBasis(int dim, Eigen::VectorXd x_points,
                         Eigen::VectorXd p_points)
    : dim_(dim), x_points_(std::move(x_points)), p_points_(std::move(p_points)) {
  if (dim_ < 1) throw std::invalid_argument("WignerBasis: dim must be >= 1");
  if (x_points_.size() == 0 || p_points_.size() == 0) {
    throw std::invalid_argument("WignerBasis: empty grid axis");
  }
  const int nx = static_cast<int>(x_points_.size());
  const int np = static_cast<int>(p_points_.size());
  bmat_ = CMatrix::Zero(nx * np, dim_ * dim_);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < np; ++j) {
      const complexd alpha(x_points_[i] * M_SQRT1_2, p_points_[j] * M_SQRT1_2);
      fill_kernel_row(dim_, alpha, bmat_.row(i * np + j).data());
    }
  }
}

WignerBasis WignerBasis::standard(int dim) {
  return WignerBasis(dim, linspace(-3.0, 3.0, 61), linspace(-3.0, 3.0, 61));
}

Eigen::VectorXd WignerBasis::evaluate_flat(const CMatrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) {
    throw std::invalid_argument("WignerBasis: state dimension mismatch");
  }
  Eigen::Map<const Eigen::VectorXcd> vec(rho.data(), dim_ * dim_);
  return (bmat_ * vec).real();
}

WignerGrid WignerBasis::evaluate(const CMatrix& rho) const {
  Eigen::VectorXd flat = evaluate_flat(rho);
  WignerGrid grid;
  grid.x_points = x_points_;
  grid.p_points = p_points_;
  const int nx = static_cast<int>(x_points_.size());
  const int np = static_cast<int>(p_points_.size());
  grid.values.resize(nx, np);
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < np; ++j) grid.values(i, j) = flat[i * np + j];
  }
  return grid;
}

double wigner_point(const CMatrix& rho, double x, double p) {
  const int dim = static_cast<int>(rho.rows());
  if (rho.cols() != dim) throw std::invalid_argument("wigner_point: non-square");
  std::vector<complexd> row(static_cast<size_t>(dim) * dim, complexd(0, 0));
  fill_kernel_row(dim, complexd(x * M_SQRT1_2, p * M_SQRT1_2), row.data());
  complexd acc(0, 0);
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n < dim; ++n) acc += row[m * dim + n] * rho(m, n);
  }
  return acc.real();
}

WignerGrid wigner(const DensityMatrix& rho, const Eigen::VectorXd& x_points,
                  const Eigen::VectorXd& p_points) {
  if (rho.space.modes() != 1) {
    throw std::invalid_argument("wigner: single-mode states only");
  }
  WignerBasis basis(rho.space.total_dim(), x_points, p_points);
  return basis.evaluate(rho.mat);
}

WignerGrid wigner(const DensityMatrix& rho) {
  return wigner(rho, linspace(-3.0, 3.0, 61), linspace(-3.0, 3.0, 61));
}

}  // namespace qrp
