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

// Central finite-difference oracle for LossAndGrad.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sparse_forge/encoder.hpp"
#include "sparse_forge/objective.hpp"
#include "sparse_forge/random.hpp"

namespace sparse_forge::testing {

struct TensorCheck {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_grad = 0.0;
};

// Elementwise |a - n| / max(|a|, |n|, floor); max over each tensor.
inline std::vector<TensorCheck> CheckGradients(const EncoderParams& params,
                                               const TokenizedBatch& batch,
                                               const ObjectiveSettings& settings,
                                               double step = 1e-5, double floor = 1e-6) {
  const LossOutput out = LossAndGrad(params, batch, settings);
  std::vector<const double*> analytic;
  out.grads.weights.ForEach(
      [&](const char*, const double* data, std::size_t) { analytic.push_back(data); });

  std::vector<TensorCheck> checks;
  EncoderParams probe = params;
  std::size_t tensor = 0;
  probe.weights.ForEach([&](const char* name, double* data, std::size_t n) {
    TensorCheck check{name, 0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double saved = data[i];
      data[i] = saved + step;
      const double up = ObjectiveValue(probe, batch, settings);
      data[i] = saved - step;
      const double down = ObjectiveValue(probe, batch, settings);
      data[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[tensor][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      check.max_rel_error = std::max(check.max_rel_error, std::abs(a - numeric) / denom);
      check.max_abs_grad = std::max(check.max_abs_grad, std::abs(a));
    }
    checks.push_back(check);
    ++tensor;
  });
  return checks;
}

// Random batch of `size` (query, doc) token sequences, lengths in [2, max_len].
inline TokenizedBatch RandomTokenBatch(Rng& rng, std::size_t size, std::size_t vocab,
                                       std::size_t max_len) {
  TokenizedBatch batch;
  auto seq = [&] {
    std::vector<TokenId> t(2 + rng.Below(max_len - 1));
    for (auto& x : t) x = static_cast<TokenId>(1 + rng.Below(vocab - 1));
    return t;
  };
  for (std::size_t i = 0; i < size; ++i) {
    batch.queries.push_back(seq());
    batch.docs.push_back(seq());
  }
  return batch;
}

}  // namespace sparse_forge::testing
