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

#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace sparse_forge {

using TermId = std::uint32_t;

// Row-major dense matrix used throughout the encoder.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Per-position vocabulary logits: one row per input position, one column per
// vocabulary id.
using LogitMatrix = Matrix;

struct SparseEntry {
  TermId term = 0;
  double weight = 0.0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Sorted (term, weight) pairs with strictly positive weights. Zero weights are
// dropped on construction, so an all-zero vector and an empty one compare equal.
class SparseVector {
 public:
  SparseVector() = default;

  // Validates ordering and drops zero weights. Throws ContractError on
  // unsorted/duplicate terms, negative or non-finite weights.
  static SparseVector FromEntries(std::vector<SparseEntry> entries);

  // Sorts, rejects duplicates, then behaves as FromEntries.
  static SparseVector FromUnsorted(std::vector<SparseEntry> entries);

  // Keeps entries with weight > 0. Throws on negative or non-finite values.
  static SparseVector FromDense(std::span<const double> dense);

  std::span<const SparseEntry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  // Weight of term, 0 when absent.
  double weight(TermId term) const noexcept;

  // Largest term id + 1, or 0 when empty.
  std::size_t min_vocab_size() const noexcept {
    return entries_.empty() ? 0 : static_cast<std::size_t>(entries_.back().term) + 1;
  }

  std::vector<double> Densify(std::size_t vocab_size) const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;

 private:
  std::vector<SparseEntry> entries_;
};

// w_j = max over active rows i of log(1 + relu(logits(i, j))).
// Throws ContractError when active_rows is empty or out of range, NumericError
// on NaN in any active row.
SparseVector SaturatePool(const LogitMatrix& logits, std::span<const std::size_t> active_rows);

// Pools over every row.
SparseVector SaturatePool(const LogitMatrix& logits);

// Row that wins the max for each pooled term, lowest index on ties. Parallel to
// result.entries().
struct PoolingTrace {
  SparseVector pooled;
  std::vector<std::size_t> argmax_row;
};
PoolingTrace SaturatePoolWithTrace(const LogitMatrix& logits,
                                   std::span<const std::size_t> active_rows);

double Dot(const SparseVector& q, const SparseVector& d) noexcept;

struct FlopsStat {
  double loss = 0.0;
  std::vector<double> mean_activation;
};

// loss = sum_j ((1/N) sum_i w_j^(i))^2. Throws ContractError on an empty batch
// or a term id >= vocab_size.
FlopsStat ComputeFlops(std::span<const SparseVector> batch, std::size_t vocab_size);

// Mean number of stored entries. Throws ContractError on an empty batch.
double AverageNnz(std::span<const SparseVector> batch);

}  // namespace sparse_forge
