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

#include <gtest/gtest.h>

#include <cmath>

#include "gradient_check.hpp"
#include "sparse_forge/error.hpp"
#include "test_support.hpp"

namespace sparse_forge {
namespace {

EncoderConfig TinyConfig(std::uint64_t seed) {
  EncoderConfig c;
  c.vocab_size = 20;
  c.embed_dim = 8;
  c.max_len = 8;
  c.ffn_dim = 16;
  c.seed = seed;
  c.init_scale = 0.5;
  return c;
}

ScoreMatrix RandomScores(Rng& rng, std::size_t n) {
  ScoreMatrix s{n, std::vector<double>(n * n)};
  for (auto& v : s.values) v = rng.Uniform(-1.0, 1.0);
  return s;
}

// Plain softmax cross-entropy without the max shift.
double InfoNceOracle(const ScoreMatrix& s, double tau) {
  double total = 0.0;
  for (std::size_t i = 0; i < s.n; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < s.n; ++j) z += std::exp(s(i, j) / tau);
    total += -std::log(std::exp(s(i, i) / tau) / z);
  }
  return total / static_cast<double>(s.n);
}

TEST(InfoNceTest, UniformScoresGiveLogN) {
  for (std::size_t n : {2u, 3u, 8u, 32u}) {
    const ScoreMatrix s{n, std::vector<double>(n * n, 0.7)};
    EXPECT_NEAR(InfoNce(s, 0.05), std::log(static_cast<double>(n)), 1e-12);
  }
}

TEST(InfoNceTest, SaturatedDiagonal) {
  ScoreMatrix s{4, std::vector<double>(16, 0.0)};
  for (std::size_t i = 0; i < 4; ++i) s(i, i) = 50.0;
  EXPECT_LT(InfoNce(s, 1.0), 1e-20);
}

TEST(InfoNceTest, MatchesSoftmaxOracle) {
  Rng rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = RandomScores(rng, 4);
    EXPECT_NEAR(InfoNce(s, 0.05), InfoNceOracle(s, 0.05), 1e-10);
  }
}

TEST(InfoNceTest, Errors) {
  EXPECT_THROW(InfoNce(ScoreMatrix{1, {0.0}}, 0.05), ContractError);
  EXPECT_THROW(InfoNce(ScoreMatrix{2, {0.0, 0.0, 0.0}}, 0.05), ContractError);
  EXPECT_THROW(InfoNce(ScoreMatrix{2, std::vector<double>(4)}, 0.0), ContractError);
}

TEST(InfoNceProperty, RowShiftInvariant) {
  Rng rng(52);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = RandomScores(rng, 5);
    const double before = InfoNce(s, 0.1);
    const std::size_t row = rng.Below(5);
    const double shift = rng.Uniform(-10.0, 10.0);
    for (std::size_t j = 0; j < 5; ++j) s(row, j) += shift;
    EXPECT_NEAR(InfoNce(s, 0.1), before, 1e-9);
  }
}

TEST(InfoNceTest, GradientMatchesFiniteDifferences) {
  Rng rng(53);
  auto s = RandomScores(rng, 5);
  const auto [loss, grad] = InfoNceWithGrad(s, 0.2);
  EXPECT_DOUBLE_EQ(loss, InfoNce(s, 0.2));
  for (std::size_t k = 0; k < s.values.size(); ++k) {
    const double saved = s.values[k];
    s.values[k] = saved + 1e-6;
    const double up = InfoNce(s, 0.2);
    s.values[k] = saved - 1e-6;
    const double down = InfoNce(s, 0.2);
    s.values[k] = saved;
    EXPECT_NEAR(grad.values[k], (up - down) / 2e-6, 1e-7);
  }
}

TEST(LossAndGradTest, IdenticalDocumentsGiveLogBatchSize) {
  const auto p = InitParams(TinyConfig(1));
  TokenizedBatch batch;
  batch.queries = {{1, 2}, {3, 4, 5}, {6}, {7, 8}};
  batch.docs.assign(4, std::vector<TokenId>{9, 10, 11});
  const auto out = LossAndGrad(p, batch, ObjectiveSettings{0.0, 0.0, 0.05, true, true});
  EXPECT_NEAR(out.loss, std::log(4.0), 1e-12);
  EXPECT_NEAR(out.infonce, std::log(4.0), 1e-12);
}

TEST(LossAndGradTest, RejectsSingletonBatch) {
  const auto p = InitParams(TinyConfig(1));
  TokenizedBatch batch{{{1}}, {{2}}};
  EXPECT_THROW(LossAndGrad(p, batch, ObjectiveSettings{}), ContractError);
  TokenizedBatch uneven{{{1}, {2}}, {{3}}};
  EXPECT_THROW(LossAndGrad(p, uneven, ObjectiveSettings{}), ContractError);
}

TEST(LossAndGradTest, LossDecomposes) {
  Rng rng(54);
  const auto p = InitParams(TinyConfig(2));
  const auto batch = testing::RandomTokenBatch(rng, 4, 20, 8);
  const ObjectiveSettings settings{0.3, 0.7, 0.05, true, false};
  const auto out = LossAndGrad(p, batch, settings);
  EXPECT_NEAR(out.loss, out.infonce + 0.3 * out.flops_q + 0.7 * out.flops_d, 1e-12);
  EXPECT_EQ(out.loss, ObjectiveValue(p, batch, settings));
  EXPECT_GT(out.nnz_q, 0.0);
}

TEST(LossAndGradTest, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(100 + seed);
    const auto p = InitParams(TinyConfig(seed));
    const auto batch = testing::RandomTokenBatch(rng, 3, 20, 8);
    for (bool echo : {false, true}) {
      const ObjectiveSettings settings{0.01, 0.01, 0.05, echo, echo};
      for (const auto& c : testing::CheckGradients(p, batch, settings)) {
        EXPECT_LT(c.max_rel_error, 1e-4) << c.name << " seed " << seed << " echo " << echo;
      }
    }
  }
}

TEST(LossAndGradTest, LargeLambdaGradientsMatchFiniteDifferences) {
  Rng rng(7);
  const auto p = InitParams(TinyConfig(7));
  const auto batch = testing::RandomTokenBatch(rng, 4, 20, 6);
  const ObjectiveSettings settings{2.0, 3.0, 0.5, true, false};
  for (const auto& c : testing::CheckGradients(p, batch, settings)) {
    EXPECT_LT(c.max_rel_error, 1e-4) << c.name;
  }
}

// Token 19 appears only as input and its output column is pushed far below zero,
// so it never wins a pooling max. Its embedding row still gets gradient via lookup.
TEST(LossAndGradTest, InputOnlyTokenStillReceivesEmbeddingGradient) {
  auto p = InitParams(TinyConfig(3));
  p.weights.out_bias(19) = -1e3;
  TokenizedBatch batch;
  batch.queries = {{19, 2, 3}, {4, 5}, {6, 19}};
  batch.docs = {{7, 8}, {9, 10, 11}, {12, 13}};
  const ObjectiveSettings settings{0.01, 0.01, 0.05, true, true};
  const auto out = LossAndGrad(p, batch, settings);
  const double analytic = out.grads.weights.embedding.row(19).cwiseAbs().maxCoeff();
  EXPECT_GT(analytic, 1e-8);

  EncoderParams probe = p;
  for (Eigen::Index c = 0; c < 8; ++c) {
    const double saved = probe.weights.embedding(19, c);
    probe.weights.embedding(19, c) = saved + 1e-5;
    const double up = ObjectiveValue(probe, batch, settings);
    probe.weights.embedding(19, c) = saved - 1e-5;
    const double down = ObjectiveValue(probe, batch, settings);
    probe.weights.embedding(19, c) = saved;
    const double numeric = (up - down) / 2e-5;
    const double a = out.grads.weights.embedding(19, c);
    EXPECT_LT(std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6}), 1e-4);
  }
}

TEST(LossAndGradProperty, ThreadCountDoesNotChangeBits) {
  Rng rng(55);
  const auto p = InitParams(TinyConfig(4));
  const auto batch = testing::RandomTokenBatch(rng, 6, 20, 8);
  const ObjectiveSettings settings{0.01, 0.008, 0.05, true, true};
  const auto a = LossAndGrad(p, batch, settings, 1);
  const auto b = LossAndGrad(p, batch, settings, 3);
  EXPECT_EQ(a.loss, b.loss);
  std::vector<std::vector<double>> ga, gb;
  a.grads.weights.ForEach([&](const char*, const double* d, std::size_t n) { ga.emplace_back(d, d + n); });
  b.grads.weights.ForEach([&](const char*, const double* d, std::size_t n) { gb.emplace_back(d, d + n); });
  EXPECT_EQ(ga, gb);
}

TEST(TokenizeBatchTest, TokenizesBothSides) {
  const Vocabulary vocab({"<unk>", "cat", "dog", "fish"});
  TrainingBatch batch{{{"Cat?", "dog fish"}, {"fish", "cat cat dog"}}};
  const auto t = TokenizeBatch(batch, vocab, 2);
  EXPECT_EQ(t.queries, (std::vector<std::vector<TokenId>>{{1}, {3}}));
  EXPECT_EQ(t.docs, (std::vector<std::vector<TokenId>>{{2, 3}, {1, 1}}));
  TrainingBatch bad{{{"cat", "zebra"}, {"dog", "fish"}}};
  EXPECT_THROW(TokenizeBatch(bad, vocab, 4), FormatError);
}

}  // namespace
}  // namespace sparse_forge
