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
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sparse_forge/dataset_mix.hpp"
#include "sparse_forge/encoder.hpp"
#include "sparse_forge/vocabulary.hpp"

namespace sparse_forge {

// Desk-scale defaults. The reference large-scale recipe used batch 512,
// 150k steps, a 50k-step lambda ramp and 6000 warmup steps.
struct TrainConfig {
  double lambda_q_max = 0.01;
  double lambda_d_max = 0.008;
  std::optional<std::int64_t> lambda_ramp_steps;  // default total_steps / 4
  std::int64_t total_steps = 2000;
  std::size_t batch_size = 32;
  double lr_max = 2e-3;
  std::optional<std::int64_t> lr_warmup_steps;  // default total_steps / 10
  double temperature = 0.05;
  std::uint64_t seed = 0;
  bool echo_query = true;
  bool echo_doc = true;

  std::int64_t ramp_steps() const { return lambda_ramp_steps.value_or(total_steps / 4); }
  std::int64_t warmup_steps() const { return lr_warmup_steps.value_or(total_steps / 10); }

  // Throws ContractError unless T <= total_steps, N >= 2, tau > 0 and the
  // remaining values are in range.
  void Validate() const;
};

struct StepMetrics {
  std::int64_t step = 0;
  double loss = 0.0;
  double infonce = 0.0;
  double flops_q = 0.0;
  double flops_d = 0.0;
  double lambda_q = 0.0;
  double lambda_d = 0.0;
  double lr = 0.0;
  double nnz_q = 0.0;
  double nnz_d = 0.0;
};

struct TrainResult {
  EncoderParams params;
  std::vector<StepMetrics> metrics;
};

using ProgressFn = std::function<void(const StepMetrics&)>;

// sample batch -> encode -> InfoNCE + scheduled FLOPS -> backward -> Adam, for
// total_steps iterations. Throws NumericError on a non-finite loss.
TrainResult Train(const EncoderConfig& encoder_config, const TrainConfig& train_config,
                  const DatasetMix& mix, const Vocabulary& vocab, std::size_t threads = 1,
                  const ProgressFn& progress = {});

// Metrics JSONL, one record per step.
std::string FormatMetricsLine(const StepMetrics& m);
void WriteMetrics(const std::filesystem::path& path, const std::vector<StepMetrics>& metrics);

// JSON config files. Unknown keys are FormatErrors; missing keys keep defaults.
EncoderConfig ParseEncoderConfig(const std::string& json_text);
TrainConfig ParseTrainConfig(const std::string& json_text);
EncoderConfig LoadEncoderConfig(const std::filesystem::path& path);
TrainConfig LoadTrainConfig(const std::filesystem::path& path);
std::string EncoderConfigToJson(const EncoderConfig& config);
std::string TrainConfigToJson(const TrainConfig& config);

}  // namespace sparse_forge
