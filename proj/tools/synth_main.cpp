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

// sf-synth: writes the synthetic synonym-mismatch task used by the end-to-end
// tests (corpus, queries, qrels, training pairs and mix manifest).

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sparse_forge/sparse_forge.h"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic vocabulary-mismatch retrieval task"};
  std::string out_dir;
  std::uint64_t seed = 7;
  std::size_t docs = 500;
  std::size_t queries = 100;
  std::size_t train_pairs = 4000;
  app.add_option("--out", out_dir, "Output directory")->required();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  app.add_option("--docs", docs, "Corpus size")->capture_default_str();
  app.add_option("--queries", queries, "Evaluation queries")->capture_default_str();
  app.add_option("--train-pairs", train_pairs, "Training pairs")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (sf_generate_synonym_task(out_dir.c_str(), seed, docs, queries, train_pairs) != SF_OK) {
    std::cerr << "sf-synth: " << sf_last_error() << '\n';
    return 2;
  }
  return 0;
}
