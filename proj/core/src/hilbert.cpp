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

#include "qrp/hilbert.hpp"

#include <stdexcept>

namespace qrp {

HilbertSpace::HilbertSpace(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw std::invalid_argument("HilbertSpace: no modes");
  total_ = 1;
  for (int d : dims_) {
    if (d < 1) throw std::invalid_argument("HilbertSpace: mode dim < 1");
    total_ *= d;
  }
}

long HilbertSpace::stride(int mode) const {
  long s = 1;
  for (std::size_t m = static_cast<std::size_t>(mode) + 1; m < dims_.size();
       ++m) {
    s *= dims_[m];
  }
  return s;
}

int HilbertSpace::level_of(long idx, int mode) const {
  return static_cast<int>((idx / stride(mode)) % dims_[static_cast<std::size_t>(mode)]);
}

}  // namespace qrp
