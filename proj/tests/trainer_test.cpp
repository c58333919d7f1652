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

#include "sparse_forge/trainer.hpp"

#include <gtest/gtest.h>

#include "sparse_forge/error.hpp"
#include "sparse_forge/optimizer.hpp"
#include "sparse_forge/synth.hpp"
#include "test_support.hpp"

namespace sparse_forge {
namespace {

struct TinyTask {
  Vocabulary vocab;
  DatasetMix mix;
  EncoderConfig encoder;
};

TinyTask MakeTinyTask() {
  SynonymTaskConfig sc;
  sc.concepts = 30;
  sc.docs = 40;
  sc.queries = 10;
  sc.terms_per_doc = 4;
  sc.terms_per_query = 2;
  sc.train_pairs = 300;
  const auto task = GenerateSynonymTask(sc);
  std::vector<std::string> texts;
  for (const auto& [q, d] : task.train_pairs) {
    texts.push_back(q);
    texts.push_back(d);
  }
  auto vocab = BuildVocabulary(texts, 1, 1000);
  MixSource src;
  src.name = "tiny";
  src.weight = 1.0;
  src.pairs = task.train_pairs;
  EncoderConfig enc;
  enc.vocab_size = vocab.size();
  enc.embed_dim = 16;
  enc.max_len = 8;
  enc.ffn_dim = 32;
  enc.seed = 3;
  return {std::move(vocab), DatasetMix({std::move(src)}), enc};
}

TrainConfig SmallTrainConfig(std::int64_t steps) {
  TrainConfig c;
  c.total_steps = steps;
  c.batch_size = 8;
  c.lr_max = 3e-3;
  return c;
}

TEST(TrainConfigTest, Validate) {
  auto c = SmallTrainConfig(10);
  EXPECT_NO_THROW(c.Validate());
  c.batch_size = 1;
  EXPECT_THROW(c.Validate(), ContractError);
  c = SmallTrainConfig(10);
  c.temperature = 0.0;
  EXPECT_THROW(c.Validate(), ContractError);
  c = SmallTrainConfig(10);
  c.lambda_ramp_steps = 11;
  EXPECT_THROW(c.Validate(), ContractError);
  c = SmallTrainConfig(10);
  c.lambda_d_max = -0.1;
  EXPECT_THROW(c.Validate(), ContractError);
}

TEST(TrainConfigTest, DerivedDefaults) {
  TrainConfig c;
  EXPECT_EQ(c.total_steps, 2000);
  EXPECT_EQ(c.batch_size, 32u);
  EXPECT_EQ(c.ramp_steps(), 500);
  EXPECT_EQ(c.warmup_steps(), 200);
  EXPECT_EQ(c.temperature, 0.05);
  EXPECT_EQ(c.lambda_q_max, 0.01);
  EXPECT_EQ(c.lambda_d_max, 0.008);
}

TEST(TrainConfigTest, JsonParsing) {
  const auto c = ParseTrainConfig(
      R"({"total_steps": 40, "batch_size": 4, "lambda_ramp_steps": 10, "echo_doc": false, "temperature": 0.1})");
  EXPECT_EQ(c.total_steps, 40);
  EXPECT_EQ(c.batch_size, 4u);
  EXPECT_EQ(c.ramp_steps(), 10);
  EXPECT_EQ(c.warmup_steps(), 4);
  EXPECT_FALSE(c.echo_doc);
  EXPECT_TRUE(c.echo_query);
  EXPECT_EQ(c.temperature, 0.1);
  EXPECT_THROW(ParseTrainConfig(R"({"total_step": 40})"), FormatError);
  EXPECT_THROW(ParseTrainConfig(R"({"total_steps": "many"})"), FormatError);
  EXPECT_THROW(ParseTrainConfig("[1]"), FormatError);
  EXPECT_THROW(ParseTrainConfig("{"), FormatError);

  const auto round = ParseTrainConfig(TrainConfigToJson(c));
  EXPECT_EQ(TrainConfigToJson(round), TrainConfigToJson(c));
}

TEST(EncoderConfigJsonTest, RoundTrip) {
  const auto c = ParseEncoderConfig(R"({"vocab_size": 50, "embed_dim": 4, "seed": 9})");
  EXPECT_EQ(c.vocab_size, 50u);
  EXPECT_EQ(c.embed_dim, 4u);
  EXPECT_EQ(c.max_len, 64u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(ParseEncoderConfig(EncoderConfigToJson(c)), c);
  EXPECT_THROW(ParseEncoderConfig(R"({"heads": 2})"), FormatError);
}

TEST(TrainTest, ZeroStepsReturnsInitialParams) {
  const auto t = MakeTinyTask();
  const auto r = Train(t.encoder, SmallTrainConfig(0), t.mix, t.vocab);
  EXPECT_TRUE(r.metrics.empty());
  EXPECT_EQ(SerializeCheckpoint(r.params), SerializeCheckpoint(InitParams(t.encoder)));
}

TEST(TrainTest, VocabularyMismatchIsRejected) {
  auto t = MakeTinyTask();
  t.encoder.vocab_size += 1;
  EXPECT_THROW(Train(t.encoder, SmallTrainConfig(1), t.mix, t.vocab), ContractError);
}

TEST(TrainTest, DeterministicMetricsAndParams) {
  const auto t = MakeTinyTask();
  const auto a = Train(t.encoder, SmallTrainConfig(30), t.mix, t.vocab, 1);
  const auto b = Train(t.encoder, SmallTrainConfig(30), t.mix, t.vocab, 2);
  ASSERT_EQ(a.metrics.size(), 30u);
  ASSERT_EQ(b.metrics.size(), 30u);
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    EXPECT_EQ(FormatMetricsLine(a.metrics[i]), FormatMetricsLine(b.metrics[i]));
  }
  EXPECT_EQ(SerializeCheckpoint(a.params), SerializeCheckpoint(b.params));
}

TEST(TrainTest, MetricsFollowSchedules) {
  const auto t = MakeTinyTask();
  auto cfg = SmallTrainConfig(20);
  cfg.lambda_q_max = 0.4;
  cfg.lambda_d_max = 0.2;
  std::int64_t seen = 0;
  const auto r = Train(t.encoder, cfg, t.mix, t.vocab, 1, [&](const StepMetrics&) { ++seen; });
  EXPECT_EQ(seen, 20);
  for (const auto& m : r.metrics) {
    EXPECT_EQ(m.lambda_q, LambdaAt(m.step, 5, 0.4));
    EXPECT_EQ(m.lambda_d, LambdaAt(m.step, 5, 0.2));
    EXPECT_EQ(m.lr, LrAt(m.step, 2, 3e-3, 20));
    EXPECT_NEAR(m.loss, m.infonce + m.lambda_q * m.flops_q + m.lambda_d * m.flops_d, 1e-12);
  }
}

TEST(TrainTest, MetricsFileHasOneRecordPerStep) {
  testing::TempDir dir;
  const auto t = MakeTinyTask();
  const auto r = Train(t.encoder, SmallTrainConfig(5), t.mix, t.vocab);
  WriteMetrics(dir / "m.jsonl", r.metrics);
  const auto text = testing::ReadText(dir / "m.jsonl");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
  const auto first = text.substr(0, text.find('\n'));
  for (const char* key : {"\"step\"", "\"loss\"", "\"infonce\"", "\"flops_q\"", "\"flops_d\"",
                          "\"lambda_q\"", "\"lambda_d\"", "\"lr\"", "\"nnz_q\"", "\"nnz_d\""}) {
    EXPECT_NE(first.find(key), std::string::npos) << key;
  }
}

// With no regularization the 100-step block means of the loss keep falling.
TEST(TrainProperty, UnregularizedLossTrendsDown) {
  const auto t = MakeTinyTask();
  auto cfg = SmallTrainConfig(400);
  cfg.lambda_q_max = 0.0;
  cfg.lambda_d_max = 0.0;
  cfg.lr_warmup_steps = 0;
  const auto r = Train(t.encoder, cfg, t.mix, t.vocab);
  std::vector<double> blocks;
  for (std::size_t b = 0; b < 4; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 100; ++i) s += r.metrics[b * 100 + i].loss;
    blocks.push_back(s / 100.0);
  }
  for (std::size_t b = 1; b < blocks.size(); ++b) EXPECT_LT(blocks[b], blocks[b - 1]) << b;
}

TEST(TrainProperty, StrongerDocumentLambdaGivesSparserDocs) {
  const auto t = MakeTinyTask();
  auto run = [&](double lambda_d) {
    auto cfg = SmallTrainConfig(200);
    cfg.lambda_d_max = lambda_d;
    const auto r = Train(t.encoder, cfg, t.mix, t.vocab);
    double nnz = 0.0;
    for (std::size_t i = r.metrics.size() - 20; i < r.metrics.size(); ++i) nnz += r.metrics[i].nnz_d;
    return nnz / 20.0;
  };
  EXPECT_LT(run(0.1), run(0.0));
}

}  // namespace
}  // namespace sparse_forge
