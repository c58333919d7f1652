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
#include <map>
#include <string>
#include <vector>

namespace sparse_forge {

// query id -> doc id -> grade (>= 0).
using Qrels = std::map<std::string, std::map<std::string, std::int64_t>>;

struct RankedDoc {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const RankedDoc&, const RankedDoc&) = default;
};

// query id -> ranking, scores non-increasing, ties by doc id ascending.
using Run = std::map<std::string, std::vector<RankedDoc>>;

struct TextRecord {
  std::string id;
  std::string text;
};

// TSV with a "query-id<TAB>corpus-id<TAB>score" header.
Qrels ReadQrels(const std::filesystem::path& path);
// JSONL {"_id", "title", "text"}; text = title + " " + text, or text alone
// when the title is empty or missing.
std::vector<TextRecord> ReadCorpus(const std::filesystem::path& path);
// JSONL {"_id", "text"}.
std::vector<TextRecord> ReadQueries(const std::filesystem::path& path);

// Sorts each ranking by score descending, doc id ascending. Throws FormatError
// on a duplicate doc id within a query.
void NormalizeRun(Run& run);

// TREC six columns: "qid Q0 docid rank score tag", ranks from 1.
void WriteRun(const Run& run, const std::filesystem::path& path, const std::string& tag);
Run ReadRun(const std::filesystem::path& path);

struct MetricReport {
  std::string name;  // e.g. "ndcg@10"
  std::map<std::string, double> per_query;
  double mean = 0.0;
};

// All metrics score the queries in qrels that have at least one grade > 0; a
// query missing from the run scores 0 and run-only queries are ignored.
// Throws ContractError when k == 0.
MetricReport NdcgAtK(const Run& run, const Qrels& qrels, std::size_t k);
MetricReport RecallAtK(const Run& run, const Qrels& qrels, std::size_t k);
MetricReport MrrAtK(const Run& run, const Qrels& qrels, std::size_t k);

}  // namespace sparse_forge
