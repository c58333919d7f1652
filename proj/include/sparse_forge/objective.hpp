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

#include <string>
#include <utility>
#include <vector>

#include "sparse_forge/encoder.hpp"
#include "sparse_forge/sparse_vector.hpp"
#include "sparse_forge/vocabulary.hpp"

namespace sparse_forge {

// (query, positive document) pairs. For pair i the positives of every other
// pair act as negatives.
struct TrainingBatch {
  std::vector<std::pair<std::string, std::string>> pairs;
};

struct TokenizedBatch {
  std::vector<std::vector<TokenId>> queries;
  std::vector<std::vector<TokenId>> docs;
};

TokenizedBatch TokenizeBatch(const TrainingBatch& batch, const Vocabulary& vocab,
                             std::size_t max_len);

// Square N x N score matrix, row-major.
struct ScoreMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
};

// (1/N) sum_i -log softmax_i(s_i. / tau)[i], log-sum-exp stabilized. Throws
// ContractError for N < 2, a non-square matrix or tau <= 0.
double InfoNce(const ScoreMatrix& scores, double temperature);

// Also returns dLoss/dScores.
std::pair<double, ScoreMatrix> InfoNceWithGrad(const ScoreMatrix& scores, double temperature);

// Per-call knobs of the training objective.
struct ObjectiveSettings {
  double lambda_q = 0.0;
  double lambda_d = 0.0;
  double temperature = 0.05;
  bool echo_query = true;
  bool echo_doc = true;
};

struct LossOutput {
  double loss = 0.0;
  double infonce = 0.0;
  double flops_q = 0.0;
  double flops_d = 0.0;
  double nnz_q = 0.0;
  double nnz_d = 0.0;
  Gradients grads;
};

// loss = InfoNCE(Q D^T) + lambda_q FLOPS(Q) + lambda_d FLOPS(D) and its exact
// gradient w.r.t. every parameter. Pooling routes gradient to the lowest-index
// argmax row; ReLU kinks get subgradient 0. Sequences may be processed on
// `threads` workers; the reduction order is fixed so results do not depend on
// the thread count. Throws ContractError for fewer than two pairs.
LossOutput LossAndGrad(const EncoderParams& params, const TokenizedBatch& batch,
                       const ObjectiveSettings& settings, std::size_t threads = 1);

LossOutput LossAndGrad(const EncoderParams& params, const Vocabulary& vocab,
                       const TrainingBatch& batch, const ObjectiveSettings& settings,
                       std::size_t threads = 1);

// Loss only (no backward pass); used by finite-difference checks.
double ObjectiveValue(const EncoderParams& params, const TokenizedBatch& batch,
                      const ObjectiveSettings& settings);

}  // namespace sparse_forge
