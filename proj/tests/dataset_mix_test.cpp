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

#include "sparse_forge/dataset_mix.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "json.hpp"
#include "sparse_forge/error.hpp"
#include "test_support.hpp"

namespace sparse_forge {
namespace {

MixSource Source(const std::string& name, double weight, std::size_t n = 3) {
  MixSource s;
  s.name = name;
  s.weight = weight;
  for (std::size_t i = 0; i < n; ++i) {
    s.pairs.emplace_back(name + " q" + std::to_string(i), name + " d" + std::to_string(i));
  }
  return s;
}

TEST(DatasetMixTest, NormalizesWeights) {
  DatasetMix mix({Source("a", 3.0), Source("b", 1.0)});
  EXPECT_DOUBLE_EQ(mix.probabilities()[0], 0.75);
  EXPECT_DOUBLE_EQ(mix.probabilities()[1], 0.25);
}

TEST(DatasetMixTest, RejectsInvalidSources) {
  EXPECT_THROW(DatasetMix({}), ContractError);
  EXPECT_THROW(DatasetMix({Source("a", 0.0)}), ContractError);
  EXPECT_THROW(DatasetMix({Source("a", -1.0)}), ContractError);
  EXPECT_THROW(DatasetMix({Source("a", 1.0, 0)}), ContractError);
}

TEST(SampleBatchTest, SingleSourceFillsBatch) {
  DatasetMix mix({Source("only", 2.0, 5)});
  Rng rng(1);
  const auto batch = SampleBatch(mix, rng, 16);
  ASSERT_EQ(batch.pairs.size(), 16u);
  for (const auto& [q, d] : batch.pairs) EXPECT_EQ(q.rfind("only", 0), 0u);
}

TEST(SampleBatchTest, DeterministicGivenRng) {
  DatasetMix mix({Source("a", 1.0, 50), Source("b", 2.0, 50)});
  Rng r1(9), r2(9);
  EXPECT_EQ(SampleBatch(mix, r1, 32).pairs, SampleBatch(mix, r2, 32).pairs);
}

// Chi-square goodness of fit for a 3:1 mix, 1 degree of freedom, alpha = 0.01.
TEST(SampleSourceTest, ThreeToOneChiSquare) {
  DatasetMix mix({Source("a", 3.0), Source("b", 1.0)});
  Rng rng(2024);
  constexpr int kDraws = 40000;
  int counts[2] = {0, 0};
  for (int i = 0; i < kDraws; ++i) ++counts[mix.SampleSource(rng)];
  const double e0 = 0.75 * kDraws, e1 = 0.25 * kDraws;
  const double chi2 = (counts[0] - e0) * (counts[0] - e0) / e0 + (counts[1] - e1) * (counts[1] - e1) / e1;
  EXPECT_LT(chi2, 6.635) << counts[0] << " / " << counts[1];
}

TEST(SampleSourceTest, DefaultWeightsGooaqFrequency) {
  std::vector<MixSource> sources;
  for (const auto& w : kDefaultMixWeights) sources.push_back(Source(std::string(w.name), w.weight, 1));
  DatasetMix mix(std::move(sources));
  ASSERT_EQ(mix.sources().front().name, "gooaq_pairs");
  Rng rng(77);
  constexpr int kDraws = 100000;
  int hits = 0;
  for (int i = 0; i < kDraws; ++i) hits += mix.SampleSource(rng) == 0 ? 1 : 0;
  const double freq = static_cast<double>(hits) / kDraws;
  const double p = 0.2053;
  const double sigma = std::sqrt(p * (1.0 - p) / kDraws);
  EXPECT_NEAR(freq, p, 3.0 * sigma);
}

TEST(DefaultMixTest, TableHasTwentySixPositiveEntries) {
  EXPECT_EQ(kDefaultMixWeights.size(), 26u);
  double total = 0.0;
  for (const auto& w : kDefaultMixWeights) {
    EXPECT_GT(w.weight, 0.0) << w.name;
    total += w.weight;
  }
  EXPECT_NEAR(total, 100.0, 0.05);
  EXPECT_EQ(kDefaultMixWeights[9].name, "amazon_qa");
  EXPECT_EQ(kDefaultMixWeights[9].weight, 17.08);
  EXPECT_EQ(kDefaultMixWeights[25].name, "coco_captions");
  EXPECT_EQ(kDefaultMixWeights[25].weight, 2.82);
}

TEST(DefaultMixTest, ShippedManifestMatchesTable) {
  const auto text = testing::ReadText(SF_DEFAULT_MIX_PATH);
  const auto j = nlohmann::json::parse(text);
  const auto& sources = j.at("sources");
  ASSERT_EQ(sources.size(), kDefaultMixWeights.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    EXPECT_EQ(sources[i].at("name").get<std::string>(), kDefaultMixWeights[i].name);
    EXPECT_EQ(sources[i].at("weight").get<double>(), kDefaultMixWeights[i].weight);
  }
}

TEST(LoadDatasetMixTest, ResolvesRelativePaths) {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "pairs");
  testing::WriteText(dir / "pairs" / "a.jsonl",
                     "{\"query\":\"q1\",\"positive\":\"d1\"}\n\n{\"query\":\"q2\",\"positive\":\"d2\"}\n");
  testing::WriteText(dir / "mix.json",
                     R"({"sources":[{"name":"a","path":"pairs/a.jsonl","weight":2}]})");
  const auto mix = LoadDatasetMix(dir / "mix.json");
  ASSERT_EQ(mix.sources().size(), 1u);
  EXPECT_EQ(mix.sources()[0].pairs.size(), 2u);
  EXPECT_EQ(mix.sources()[0].pairs[1], (TextPair{"q2", "d2"}));
}

TEST(LoadDatasetMixTest, RejectsBadInputs) {
  testing::TempDir dir;
  testing::WriteText(dir / "empty.jsonl", "");
  testing::WriteText(dir / "bad.jsonl", "{\"query\":\"q\"}\n");
  testing::WriteText(dir / "m1.json", R"({"sources":[{"name":"e","path":"empty.jsonl","weight":1}]})");
  testing::WriteText(dir / "m2.json", R"({"sources":[{"name":"b","path":"bad.jsonl","weight":1}]})");
  testing::WriteText(dir / "m3.json", R"({"nope":[]})");
  testing::WriteText(dir / "m4.json", R"({"sources":[{"name":"x","path":"missing.jsonl","weight":1}]})");
  EXPECT_THROW(LoadDatasetMix(dir / "m1.json"), FormatError);
  EXPECT_THROW(LoadDatasetMix(dir / "m2.json"), FormatError);
  EXPECT_THROW(LoadDatasetMix(dir / "m3.json"), FormatError);
  EXPECT_THROW(LoadDatasetMix(dir / "m4.json"), Error);
  EXPECT_THROW(LoadDatasetMix(dir / "absent.json"), IoError);
}

}  // namespace
}  // namespace sparse_forge
