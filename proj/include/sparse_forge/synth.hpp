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
#include <string>
#include <utility>
#include <vector>

#include "sparse_forge/dataset_mix.hpp"
#include "sparse_forge/eval.hpp"

namespace sparse_forge {

// Vocabulary-mismatch benchmark: every concept has a document surface form and
// a disjoint query surface form. Queries mention only query forms of some of
// their target document's concepts, so exact lexical matching never fires.
struct SynonymTaskConfig {
  std::uint64_t seed = 7;
  std::size_t concepts = 200;
  std::size_t docs = 500;
  std::size_t queries = 100;
  std::size_t terms_per_doc = 8;
  std::size_t terms_per_query = 3;
  std::size_t train_pairs = 4000;
};

struct SynonymTask {
  std::vector<std::pair<std::string, std::string>> synonyms;  // (doc form, query form)
  std::vector<TextRecord> corpus;
  std::vector<TextRecord> queries;
  Qrels qrels;
  // Drawn from fresh documents, disjoint from the evaluation corpus.
  std::vector<TextPair> train_pairs;
};

SynonymTask GenerateSynonymTask(const SynonymTaskConfig& config);

// Writes corpus.jsonl, queries.jsonl, qrels/test.tsv, train_pairs.jsonl and a
// single-source mix.json into dir (created if needed).
void WriteSynonymTask(const SynonymTask& task, const std::filesystem::path& dir);

}  // namespace sparse_forge
