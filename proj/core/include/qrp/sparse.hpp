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

#include <vector>

#include "qrp/operators.hpp"

namespace qrp {

// Minimal CSR operator used by the master-equation hot path.  Both kernels
// below stream the dense operand row by row, which is the friendly access
// order for the row-major CMatrix layout used across the library.
struct SparseOp {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr;  // size rows + 1
  std::vector<int> col;      // size nnz
  std::vector<complexd> val; // size nnz

  int nnz() const { return static_cast<int>(col.size()); }

  static SparseOp from_dense(const CMatrix& a, double drop_tol = 0.0) {
    SparseOp op;
    op.rows = static_cast<int>(a.rows());
    op.cols = static_cast<int>(a.cols());
    op.row_ptr.assign(op.rows + 1, 0);
    for (int i = 0; i < op.rows; ++i) {
      for (int j = 0; j < op.cols; ++j) {
        if (std::abs(a(i, j)) > drop_tol) {
          op.col.push_back(j);
          op.val.push_back(a(i, j));
        }
      }
      op.row_ptr[i + 1] = static_cast<int>(op.col.size());
    }
    return op;
  }

  CMatrix to_dense() const {
    CMatrix a = CMatrix::Zero(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) a(i, col[p]) += val[p];
    }
    return a;
  }
};

// Y = A * X.
inline void csr_left_mul(const SparseOp& a, const CMatrix& x, CMatrix& y) {
  y.setZero(a.rows, x.cols());
  for (int i = 0; i < a.rows; ++i) {
    auto yi = y.row(i);
    for (int p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      yi += a.val[p] * x.row(a.col[p]);
    }
  }
}

// Y += alpha * A * X.
inline void csr_left_mul_add(const SparseOp& a, const CMatrix& x, CMatrix& y,
                             complexd alpha) {
  for (int i = 0; i < a.rows; ++i) {
    auto yi = y.row(i);
    for (int p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      yi += (alpha * a.val[p]) * x.row(a.col[p]);
    }
  }
}

// Y += alpha * X * B.  Loop order keeps the write set inside Y's current row;
// B is revisited per row and is expected to stay cache resident.
inline void csr_right_mul_add(const CMatrix& x, const SparseOp& b, CMatrix& y,
                              complexd alpha) {
  const int nrow = static_cast<int>(x.rows());
  for (int i = 0; i < nrow; ++i) {
    const complexd* xi = x.row(i).data();
    complexd* yi = y.row(i).data();
    for (int k = 0; k < b.rows; ++k) {
      const complexd xv = alpha * xi[k];
      if (xv == complexd(0.0, 0.0)) continue;
      for (int p = b.row_ptr[k]; p < b.row_ptr[k + 1]; ++p) {
        yi[b.col[p]] += xv * b.val[p];
      }
    }
  }
}

}  // namespace qrp
