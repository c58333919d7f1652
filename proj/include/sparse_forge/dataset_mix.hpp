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

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparse_forge/objective.hpp"
#include "sparse_forge/random.hpp"

namespace sparse_forge {

using TextPair = std::pair<std::string, std::string>;

struct MixSource {
  std::string name;
  std::filesystem::path path;
  double weight = 0.0;
  std::vector<TextPair> pairs;
};

// Weighted collection of pair sources. Probabilities are the weights
// normalized to sum to one.
class DatasetMix {
 public:
  // Throws ContractError on no sources, non-positive weights or empty sources.
  explicit DatasetMix(std::vector<MixSource> sources);

  const std::vector<MixSource>& sources() const noexcept { return sources_; }
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }

  std::size_t SampleSource(Rng& rng) const;

 private:
  std::vector<MixSource> sources_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

// Pair file: JSONL with {"query": ..., "positive": ...} per line.
std::vector<TextPair> ReadPairs(const std::filesystem::path& path);

// Manifest: {"sources": [{"name", "path", "weight"}]}. Relative paths resolve
// against the manifest's directory.
DatasetMix LoadDatasetMix(const std::filesystem::path& manifest);

// Source first (by weight), then a uniform pair within it.
TrainingBatch SampleBatch(const DatasetMix& mix, Rng& rng, std::size_t batch_size);

struct MixWeight {
  std::string_view name;
  double weight;
};

// Sentence-embedding training collections and their sampling ratios (percent),
// as shipped in data/default_mix.json.
inline constexpr std::array<MixWeight, 26> kDefaultMixWeights{{
    {"gooaq_pairs", 20.53},
    {"yahoo_answers_title_answer", 8.17},
    {"msmarco_triplets", 3.43},
    {"stackexchange_title_title", 2.08},
    {"eli5_question_answer", 2.22},
    {"yahoo_answers_title_question", 4.50},
    {"squad_pairs", 0.60},
    {"yahoo_answers_question_answer", 4.64},
    {"wikihow", 0.88},
    {"amazon_qa", 17.08},
    {"quora_question_pairs", 1.02},
    {"stackexchange_title_body_title_body", 1.71},
    {"stackexchange_body_body", 1.71},
    {"agnews", 7.89},
    {"AllNLI", 2.14},
    {"npr", 4.05},
    {"specter_train_triples", 2.59},
    {"SimpleWiki", 0.70},
    {"altlex", 0.77},
    {"ccnews_title_text", 4.19},
    {"sentence_compression", 1.23},
    {"TriviaQA_pairs", 0.50},
    {"cnn_dailymail", 1.96},
    {"flickr30k_captions", 1.08},
    {"xsum", 1.54},
    {"coco_captions", 2.82},
}};

}  // namespace sparse_forge
