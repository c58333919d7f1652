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

#include "sparse_forge/sparse_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparse_forge/error.hpp"

namespace sparse_forge {

SparseVector SparseVector::FromEntries(std::vector<SparseEntry> entries) {
  SparseVector out;
  out.entries_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (i > 0 && e.term <= entries[i - 1].term) {
      throw ContractError("sparse vector terms must be strictly ascending (term " +
                          std::to_string(e.term) + ")");
    }
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw ContractError("sparse vector weight for term " + std::to_string(e.term) +
                          " must be finite and nonnegative");
    }
    if (e.weight > 0.0) out.entries_.push_back(e);
  }
  return out;
}

SparseVector SparseVector::FromUnsorted(std::vector<SparseEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) { return a.term < b.term; });
  return FromEntries(std::move(entries));
}

SparseVector SparseVector::FromDense(std::span<const double> dense) {
  std::vector<SparseEntry> entries;
  for (std::size_t j = 0; j < dense.size(); ++j) {
    if (dense[j] != 0.0) entries.push_back({static_cast<TermId>(j), dense[j]});
  }
  return FromEntries(std::move(entries));
}

double SparseVector::weight(TermId term) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), term,
                             [](const SparseEntry& e, TermId t) { return e.term < t; });
  return (it != entries_.end() && it->term == term) ? it->weight : 0.0;
}

std::vector<double> SparseVector::Densify(std::size_t vocab_size) const {
  if (min_vocab_size() > vocab_size) {
    throw ContractError("sparse vector term exceeds vocabulary size " +
                        std::to_string(vocab_size));
  }
  std::vector<double> dense(vocab_size, 0.0);
  for (const auto& e : entries_) dense[e.term] = e.weight;
  return dense;
}

PoolingTrace SaturatePoolWithTrace(const LogitMatrix& logits,
                                   std::span<const std::size_t> active_rows) {
  if (active_rows.empty()) throw ContractError("saturate_pool: no active positions");
  const auto rows = static_cast<std::size_t>(logits.rows());
  const auto cols = static_cast<std::size_t>(logits.cols());
  for (std::size_t r : active_rows) {
    if (r >= rows) {
      throw ContractError("saturate_pool: position " + std::to_string(r) +
                          " out of range for " + std::to_string(rows) + " rows");
    }
  }

  // Max of the raw logit is taken first; log1p(relu(.)) is monotone so the
  // winning row is the same.
  std::vector<double> best(cols, 0.0);
  std::vector<std::size_t> best_row(cols, 0);
  std::vector<bool> seen(cols, false);
  for (std::size_t r : active_rows) {
    const double* row = logits.data() + r * cols;
    for (std::size_t j = 0; j < cols; ++j) {
      const double v = row[j];
      if (std::isnan(v)) {
        throw NumericError("saturate_pool: NaN logit at position " + std::to_string(r) +
                           ", term " + std::to_string(j));
      }
      if (v > 0.0 && (!seen[j] || v > best[j] || (v == best[j] && r < best_row[j]))) {
        best[j] = v;
        best_row[j] = r;
        seen[j] = true;
      }
    }
  }

  PoolingTrace trace;
  std::vector<SparseEntry> entries;
  for (std::size_t j = 0; j < cols; ++j) {
    if (!seen[j]) continue;
    const double w = std::log1p(best[j]);
    if (!std::isfinite(w)) {
      throw NumericError("saturate_pool: non-finite weight for term " + std::to_string(j));
    }
    entries.push_back({static_cast<TermId>(j), w});
    trace.argmax_row.push_back(best_row[j]);
  }
  trace.pooled = SparseVector::FromEntries(std::move(entries));
  return trace;
}

SparseVector SaturatePool(const LogitMatrix& logits, std::span<const std::size_t> active_rows) {
  return SaturatePoolWithTrace(logits, active_rows).pooled;
}

SparseVector SaturatePool(const LogitMatrix& logits) {
  std::vector<std::size_t> all(static_cast<std::size_t>(logits.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return SaturatePool(logits, all);
}

double Dot(const SparseVector& q, const SparseVector& d) noexcept {
  auto a = q.entries();
  auto b = d.entries();
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].term < b[j].term) {
      ++i;
    } else if (b[j].term < a[i].term) {
      ++j;
    } else {
      sum += a[i].weight * b[j].weight;
      ++i;
      ++j;
    }
  }
  return sum;
}

FlopsStat ComputeFlops(std::span<const SparseVector> batch, std::size_t vocab_size) {
  if (batch.empty()) throw ContractError("flops: empty batch");
  FlopsStat stat;
  stat.mean_activation.assign(vocab_size, 0.0);
  for (const auto& v : batch) {
    if (v.min_vocab_size() > vocab_size) {
      throw ContractError("flops: term id exceeds vocabulary size");
    }
    for (const auto& e : v.entries()) stat.mean_activation[e.term] += e.weight;
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (double& m : stat.mean_activation) {
    m *= inv_n;
    stat.loss += m * m;
  }
  return stat;
}

double AverageNnz(std::span<const SparseVector> batch) {
  if (batch.empty()) throw ContractError("avg_nnz: empty batch");
  std::size_t total = 0;
  for (const auto& v : batch) total += v.size();
  return static_cast<double>(total) / static_cast<double>(batch.size());
}

}  // namespace sparse_forge
