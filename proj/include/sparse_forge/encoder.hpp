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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparse_forge/sparse_vector.hpp"
#include "sparse_forge/vocabulary.hpp"

namespace sparse_forge {

struct EncoderConfig {
  std::size_t vocab_size = 5000;
  std::size_t embed_dim = 64;
  // Token positions before echo doubling; positional table has 2 * max_len rows.
  std::size_t max_len = 64;
  std::size_t ffn_dim = 128;
  std::uint64_t seed = 0;
  double init_scale = 0.05;

  // Throws ContractError unless V > 1, D > 0, L >= 2, F > 0, init_scale >= 0.
  void Validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

// All trainable tensors. The embedding matrix doubles as the output projection:
// logits(i, j) = z_i . embedding.row(j) + out_bias(j).
struct EncoderWeights {
  Matrix embedding;  // V x D
  Matrix position;   // 2L x D
  Matrix wq, wk, wv, wo;  // D x D
  Vector norm1, norm2;    // D, RMS-norm gains
  Matrix ffn_in;   // D x F
  Matrix ffn_out;  // F x D
  Vector out_bias; // V

  static EncoderWeights Zeros(const EncoderConfig& config);

  // Visits tensors in checkpoint order: E, P, Wq, Wk, Wv, Wo, g1, g2, W1, W2, b.
  template <typename Fn>
  void ForEach(Fn&& fn) {
    fn("embedding", embedding.data(), static_cast<std::size_t>(embedding.size()));
    fn("position", position.data(), static_cast<std::size_t>(position.size()));
    fn("wq", wq.data(), static_cast<std::size_t>(wq.size()));
    fn("wk", wk.data(), static_cast<std::size_t>(wk.size()));
    fn("wv", wv.data(), static_cast<std::size_t>(wv.size()));
    fn("wo", wo.data(), static_cast<std::size_t>(wo.size()));
    fn("norm1", norm1.data(), static_cast<std::size_t>(norm1.size()));
    fn("norm2", norm2.data(), static_cast<std::size_t>(norm2.size()));
    fn("ffn_in", ffn_in.data(), static_cast<std::size_t>(ffn_in.size()));
    fn("ffn_out", ffn_out.data(), static_cast<std::size_t>(ffn_out.size()));
    fn("out_bias", out_bias.data(), static_cast<std::size_t>(out_bias.size()));
  }
  template <typename Fn>
  void ForEach(Fn&& fn) const {
    const_cast<EncoderWeights*>(this)->ForEach(
        [&](const char* name, double* data, std::size_t n) {
          fn(name, static_cast<const double*>(data), n);
        });
  }

  bool SameShape(const EncoderWeights& other) const;
  std::size_t ParameterCount() const;
};

struct EncoderParams {
  EncoderConfig config;
  EncoderWeights weights;
};

// Same tensor layout as EncoderParams::weights.
struct Gradients {
  EncoderWeights weights;
};

// Uniform [-init_scale, init_scale] for every matrix, zero bias, unit gains.
// Deterministic given config.seed.
EncoderParams InitParams(const EncoderConfig& config);

// Intermediate activations kept for the backward pass. Row count n is the
// sequence length after echo duplication.
struct ForwardCache {
  std::vector<TokenId> tokens;
  Matrix x;          // embedding + position
  Vector inv_rms1;
  Matrix x_normed;   // x / rms, before gain
  Matrix u;          // gain-scaled attention input
  Matrix q, k, v;
  Matrix attn;       // n x n causal softmax weights
  Matrix attn_out;   // attn * v
  Matrix h;          // x + attn_out * wo
  Vector inv_rms2;
  Matrix h_normed;
  Matrix r;
  Matrix ffn_pre;
  Matrix ffn_act;
  Matrix z;
  LogitMatrix logits;
};

// Throws ContractError on an empty sequence, length > max_len or token id >= V.
ForwardCache ForwardWithCache(const EncoderParams& params, std::span<const TokenId> tokens,
                              bool echo);
LogitMatrix Forward(const EncoderParams& params, std::span<const TokenId> tokens, bool echo);

// Rows pooled for an input of token_count tokens: all rows in plain mode, the
// second occurrence in echo mode.
std::vector<std::size_t> PooledRows(std::size_t token_count, bool echo);

SparseVector EncodeTokens(const EncoderParams& params, std::span<const TokenId> tokens,
                          bool echo);
SparseVector Encode(const EncoderParams& params, const Vocabulary& vocab, std::string_view text,
                    bool echo);

struct LogitGrad {
  std::size_t row;
  TermId col;
  double grad;
};

// Per-sequence gradient. Embedding and bias contributions are kept in factored
// form so that batch reduction can run in a fixed order.
struct SequenceGrad {
  Matrix d_input;  // n x D, gradient w.r.t. x (feeds embedding rows and positions)
  std::vector<LogitGrad> logit_grads;
  Matrix wq, wk, wv, wo;
  Vector norm1, norm2;
  Matrix ffn_in, ffn_out;
};

SequenceGrad Backward(const EncoderParams& params, const ForwardCache& cache,
                      std::vector<LogitGrad> logit_grads);

// Adds one sequence's gradient into grads. Caller controls the order.
void Accumulate(Gradients& grads, const ForwardCache& cache, const SequenceGrad& seq);

// Binary checkpoint: "SPFG", u32 version, V/D/L/F as u64, then every tensor
// as little-endian f64 in EncoderWeights::ForEach order. Seed and init_scale
// are not stored.
void SaveCheckpoint(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams LoadCheckpoint(const std::filesystem::path& path);
std::vector<std::uint8_t> SerializeCheckpoint(const EncoderParams& params);
EncoderParams DeserializeCheckpoint(std::span<const std::uint8_t> bytes);

}  // namespace sparse_forge
