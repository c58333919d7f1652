// Copyright 2026 The Sparse Forge Authors
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

// Shared helpers for the unit tests.

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fs_support.hpp"
#include "sparse_forge/random.hpp"
#include "sparse_forge/sparse_vector.hpp"

namespace sparse_forge::testing {

inline Matrix RandomMatrix(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.Uniform(lo, hi);
  }
  return m;
}

// nnz distinct terms below vocab_size with weights in (0, max_weight].
inline SparseVector RandomSparse(Rng& rng, std::size_t vocab_size, std::size_t nnz,
                                 double max_weight = 3.0) {
  std::vector<SparseEntry> entries;
  std::vector<bool> used(vocab_size, false);
  while (entries.size() < nnz) {
    const auto t = static_cast<TermId>(rng.Below(vocab_size));
    if (used[t]) continue;
    used[t] = true;
    entries.push_back({t, max_weight * (1.0 - rng.Uniform01())});
  }
  return SparseVector::FromUnsorted(std::move(entries));
}

}  // namespace sparse_forge::testing
