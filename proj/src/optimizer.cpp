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

#include "sparse_forge/optimizer.hpp"

#include <cmath>
#include <vector>

#include "sparse_forge/error.hpp"

namespace sparse_forge {

double LambdaAt(std::int64_t step, std::int64_t ramp_steps, double lambda_max) {
  if (step < 0) throw ContractError("lambda_at: negative step");
  if (step >= ramp_steps) return lambda_max;
  const double frac = static_cast<double>(step) / static_cast<double>(ramp_steps);
  return lambda_max * frac * frac;
}

double LrAt(std::int64_t step, std::int64_t warmup_steps, double lr_max, std::int64_t total_steps) {
  if (step < 0) throw ContractError("lr_at: negative step");
  if (step < warmup_steps) {
    return lr_max * static_cast<double>(step) / static_cast<double>(warmup_steps);
  }
  if (step >= total_steps) return 0.0;
  return lr_max * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup_steps);
}

OptimizerState OptimizerState::ZerosLike(const EncoderParams& params) {
  return {EncoderWeights::Zeros(params.config), EncoderWeights::Zeros(params.config), 0};
}

void AdamStep(EncoderParams& params, const Gradients& grads, OptimizerState& state, double lr,
              const AdamSettings& s) {
  if (!params.weights.SameShape(grads.weights) || !params.weights.SameShape(state.m) ||
      !params.weights.SameShape(state.v)) {
    throw ContractError("adam_step: tensor shapes do not match");
  }
  state.t += 1;
  const double bias1 = 1.0 - std::pow(s.beta1, static_cast<double>(state.t));
  const double bias2 = 1.0 - std::pow(s.beta2, static_cast<double>(state.t));

  std::vector<double*> p_ptr, m_ptr, v_ptr;
  std::vector<const double*> g_ptr;
  std::vector<std::size_t> sizes;
  params.weights.ForEach([&](const char*, double* d, std::size_t n) {
    p_ptr.push_back(d);
    sizes.push_back(n);
  });
  grads.weights.ForEach([&](const char*, const double* d, std::size_t) { g_ptr.push_back(d); });
  state.m.ForEach([&](const char*, double* d, std::size_t) { m_ptr.push_back(d); });
  state.v.ForEach([&](const char*, double* d, std::size_t) { v_ptr.push_back(d); });

  for (std::size_t t = 0; t < sizes.size(); ++t) {
    for (std::size_t i = 0; i < sizes[t]; ++i) {
      const double g = g_ptr[t][i];
      double& m = m_ptr[t][i];
      double& v = v_ptr[t][i];
      m = s.beta1 * m + (1.0 - s.beta1) * g;
      v = s.beta2 * v + (1.0 - s.beta2) * g * g;
      const double m_hat = m / bias1;
      const double v_hat = v / bias2;
      p_ptr[t][i] -= lr * m_hat / (std::sqrt(v_hat) + s.epsilon);
    }
  }
}

}  // namespace sparse_forge
