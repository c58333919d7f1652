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

#include "sparse_forge/encoder.hpp"

namespace sparse_forge {

// lambda_max * (t / T)^2 below the ramp end, lambda_max afterwards. A ramp of 0
// means lambda_max from the first step.
double LambdaAt(std::int64_t step, std::int64_t ramp_steps, double lambda_max);

// Linear warmup 0 -> lr_max over [0, W), linear decay lr_max -> 0 over
// [W, S], 0 past S.
double LrAt(std::int64_t step, std::int64_t warmup_steps, double lr_max, std::int64_t total_steps);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  EncoderWeights m;
  EncoderWeights v;
  std::int64_t t = 0;

  static OptimizerState ZerosLike(const EncoderParams& params);
};

// Bias-corrected Adam. Throws ContractError on shape mismatch.
void AdamStep(EncoderParams& params, const Gradients& grads, OptimizerState& state, double lr,
              const AdamSettings& settings = {});

}  // namespace sparse_forge
