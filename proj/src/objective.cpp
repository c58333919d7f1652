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

#include "sparse_forge/objective.hpp"

#include <cmath>
#include <string>
#include <tuple>

#include "sparse_forge/error.hpp"
#include "sparse_forge/parallel.hpp"

namespace sparse_forge {
namespace {

void CheckScores(const ScoreMatrix& scores, double temperature) {
  if (scores.n < 2) throw ContractError("infonce: need at least 2 rows");
  if (scores.values.size() != scores.n * scores.n) {
    throw ContractError("infonce: score matrix is not square");
  }
  if (!(temperature > 0.0)) throw ContractError("infonce: temperature must be > 0");
}


struct EncodedBatch {
  std::vector<ForwardCache> caches;  // queries first, then documents
  std::vector<PoolingTrace> traces;
  std::vector<SparseVector> queries;
  std::vector<SparseVector> docs;
};

EncodedBatch EncodeBatch(const EncoderParams& params, const TokenizedBatch& batch,
                         const ObjectiveSettings& settings, std::size_t threads) {
  const std::size_t n = batch.queries.size();
  if (n < 2) throw ContractError("loss_and_grad: batch size must be >= 2");
  if (batch.docs.size() != n) {
    throw ContractError("loss_and_grad: query and document counts differ");
  }
  EncodedBatch out;
  out.caches.resize(2 * n);
  out.traces.resize(2 * n);
  ParallelFor(2 * n, threads, [&](std::size_t s) {
    const bool is_query = s < n;
    const auto& tokens = is_query ? batch.queries[s] : batch.docs[s - n];
    const bool echo = is_query ? settings.echo_query : settings.echo_doc;
    out.caches[s] = ForwardWithCache(params, tokens, echo);
    out.traces[s] = SaturatePoolWithTrace(out.caches[s].logits, PooledRows(tokens.size(), echo));
    // Pooled weights are enough for the backward pass; drop the n x V logits.
    out.caches[s].logits.resize(0, 0);
  });
  for (std::size_t s = 0; s < 2 * n; ++s) {
    (s < n ? out.queries : out.docs).push_back(out.traces[s].pooled);
  }
  return out;
}

struct LossParts {
  double infonce = 0.0;
  ScoreMatrix d_scores;
  FlopsStat flops_q;
  FlopsStat flops_d;
  double total = 0.0;
};

LossParts ComputeLoss(const EncodedBatch& enc, std::size_t vocab_size,
                      const ObjectiveSettings& settings) {
  const std::size_t n = enc.queries.size();
  ScoreMatrix scores{n, std::vector<double>(n * n)};
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) scores(a, b) = Dot(enc.queries[a], enc.docs[b]);
  }
  LossParts parts;
  std::tie(parts.infonce, parts.d_scores) = InfoNceWithGrad(scores, settings.temperature);
  parts.flops_q = ComputeFlops(enc.queries, vocab_size);
  parts.flops_d = ComputeFlops(enc.docs, vocab_size);
  parts.total = parts.infonce + settings.lambda_q * parts.flops_q.loss +
                settings.lambda_d * parts.flops_d.loss;
  return parts;
}

}  // namespace

TokenizedBatch TokenizeBatch(const TrainingBatch& batch, const Vocabulary& vocab,
                             std::size_t max_len) {
  TokenizedBatch out;
  for (const auto& [query, positive] : batch.pairs) {
    out.queries.push_back(Tokenize(query, vocab, max_len));
    out.docs.push_back(Tokenize(positive, vocab, max_len));
  }
  return out;
}

double InfoNce(const ScoreMatrix& scores, double temperature) {
  CheckScores(scores, temperature);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.n; ++i) {
    double max_s = -INFINITY;
    for (std::size_t j = 0; j < scores.n; ++j) max_s = std::max(max_s, scores(i, j) / temperature);
    double sum = 0.0;
    for (std::size_t j = 0; j < scores.n; ++j) sum += std::exp(scores(i, j) / temperature - max_s);
    total += max_s + std::log(sum) - scores(i, i) / temperature;
  }
  return total / static_cast<double>(scores.n);
}

std::pair<double, ScoreMatrix> InfoNceWithGrad(const ScoreMatrix& scores, double temperature) {
  CheckScores(scores, temperature);
  const std::size_t n = scores.n;
  ScoreMatrix grad{n, std::vector<double>(n * n)};
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double max_s = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) max_s = std::max(max_s, scores(i, j) / temperature);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      grad(i, j) = std::exp(scores(i, j) / temperature - max_s);
      sum += grad(i, j);
    }
    total += max_s + std::log(sum) - scores(i, i) / temperature;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = grad(i, j) / sum;
      grad(i, j) = (p - (i == j ? 1.0 : 0.0)) * inv_n / temperature;
    }
  }
  return {total * inv_n, std::move(grad)};
}

LossOutput LossAndGrad(const EncoderParams& params, const TokenizedBatch& batch,
                       const ObjectiveSettings& settings, std::size_t threads) {
  const std::size_t vocab = params.config.vocab_size;
  EncodedBatch enc = EncodeBatch(params, batch, settings, threads);
  const std::size_t n = enc.queries.size();
  LossParts parts = ComputeLoss(enc, vocab, settings);

  LossOutput out;
  out.loss = parts.total;
  out.infonce = parts.infonce;
  out.flops_q = parts.flops_q.loss;
  out.flops_d = parts.flops_d.loss;
  out.nnz_q = AverageNnz(enc.queries);
  out.nnz_d = AverageNnz(enc.docs);

  // dL/dw on each pooled support, then through log1p: d/dl log(1 + l) =
  // 1 / (1 + l) = exp(-w).
  const double flops_scale = 2.0 / static_cast<double>(n);
  std::vector<std::vector<LogitGrad>> logit_grads(2 * n);
  for (std::size_t s = 0; s < 2 * n; ++s) {
    const bool is_query = s < n;
    const std::size_t idx = is_query ? s : s - n;
    const auto& trace = enc.traces[s];
    const auto entries = trace.pooled.entries();
    const double lambda = is_query ? settings.lambda_q : settings.lambda_d;
    const auto& mean = is_query ? parts.flops_q.mean_activation : parts.flops_d.mean_activation;
    auto& grads = logit_grads[s];
    grads.reserve(entries.size());
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const TermId term = entries[e].term;
      double dw = lambda * flops_scale * mean[term];
      for (std::size_t o = 0; o < n; ++o) {
        dw += is_query ? parts.d_scores(idx, o) * enc.docs[o].weight(term)
                       : parts.d_scores(o, idx) * enc.queries[o].weight(term);
      }
      if (dw != 0.0) {
        grads.push_back({trace.argmax_row[e], term, dw * std::exp(-entries[e].weight)});
      }
    }
  }

  std::vector<SequenceGrad> seq_grads(2 * n);
  ParallelFor(2 * n, threads, [&](std::size_t s) {
    seq_grads[s] = Backward(params, enc.caches[s], std::move(logit_grads[s]));
  });
  out.grads.weights = EncoderWeights::Zeros(params.config);
  for (std::size_t s = 0; s < 2 * n; ++s) Accumulate(out.grads, enc.caches[s], seq_grads[s]);
  return out;
}

LossOutput LossAndGrad(const EncoderParams& params, const Vocabulary& vocab,
                       const TrainingBatch& batch, const ObjectiveSettings& settings,
                       std::size_t threads) {
  return LossAndGrad(params, TokenizeBatch(batch, vocab, params.config.max_len), settings,
                     threads);
}

double ObjectiveValue(const EncoderParams& params, const TokenizedBatch& batch,
                      const ObjectiveSettings& settings) {
  EncodedBatch enc = EncodeBatch(params, batch, settings, 1);
  return ComputeLoss(enc, params.config.vocab_size, settings).total;
}

}  // namespace sparse_forge
