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

namespace qrp {

// Composite truncated Fock space. Mode 0 is the most significant factor of
// the composite index: idx = ((n0*d1 + n1)*d2 + n2)... so a matrix on the
// full space equals kron(A0, A1, ...) of per-mode matrices.
class HilbertSpace {
 public:
  HilbertSpace() = default;
  explicit HilbertSpace(std::vector<int> dims);

  int modes() const { return static_cast<int>(dims_.size()); }
  int dim(int mode) const { return dims_[static_cast<std::size_t>(mode)]; }
  const std::vector<int>& dims() const { return dims_; }
  long total_dim() const { return total_; }

  // Stride of a mode in the composite index (product of dims to its right).
  long stride(int mode) const;
  // Occupation of `mode` encoded in composite index `idx`.
  int level_of(long idx, int mode) const;

  bool operator==(const HilbertSpace& other) const {
    return dims_ == other.dims_;
  }
  bool operator!=(const HilbertSpace& other) const { return !(*this == other); }

 private:
  std::vector<int> dims_;
  long total_ = 1;
};

}  // namespace qrp
