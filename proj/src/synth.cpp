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

#include "sparse_forge/synth.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "sparse_forge/error.hpp"
#include "sparse_forge/random.hpp"

namespace sparse_forge {
namespace {

constexpr const char* kConsonants = "bdfgklmnprstvz";
constexpr const char* kVowels = "aeiou";

std::string PseudoWord(Rng& rng) {
  std::string w;
  const auto syllables = 2 + rng.Below(2);
  for (std::uint64_t s = 0; s < syllables; ++s) {
    w.push_back(kConsonants[rng.Below(14)]);
    w.push_back(kVowels[rng.Below(5)]);
  }
  w.push_back(kConsonants[rng.Below(14)]);
  return w;
}

// Distinct indices in [0, n), in draw order.
std::vector<std::size_t> Choose(Rng& rng, std::size_t n, std::size_t count) {
  std::vector<std::size_t> picked;
  while (picked.size() < count) {
    const auto c = static_cast<std::size_t>(rng.Below(n));
    if (std::find(picked.begin(), picked.end(), c) == picked.end()) picked.push_back(c);
  }
  return picked;
}

std::string Render(const std::vector<std::size_t>& concepts,
                   const std::vector<std::pair<std::string, std::string>>& synonyms,
                   bool query_form) {
  std::string text;
  for (std::size_t c : concepts) {
    if (!text.empty()) text.push_back(' ');
    text += query_form ? synonyms[c].second : synonyms[c].first;
  }
  return text;
}

void WriteLines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

SynonymTask GenerateSynonymTask(const SynonymTaskConfig& cfg) {
  if (cfg.concepts < cfg.terms_per_doc || cfg.terms_per_doc < cfg.terms_per_query ||
      cfg.terms_per_query == 0 || cfg.queries > cfg.docs) {
    throw ContractError("synonym task: inconsistent sizes");
  }
  Rng rng(cfg.seed);
  SynonymTask task;
  std::unordered_set<std::string> used;
  auto fresh = [&] {
    std::string w;
    do {
      w = PseudoWord(rng);
    } while (!used.insert(w).second);
    return w;
  };
  for (std::size_t c = 0; c < cfg.concepts; ++c) {
    std::string doc_form = fresh();
    task.synonyms.emplace_back(std::move(doc_form), fresh());
  }

  std::vector<std::vector<std::size_t>> doc_concepts;
  for (std::size_t d = 0; d < cfg.docs; ++d) {
    doc_concepts.push_back(Choose(rng, cfg.concepts, cfg.terms_per_doc));
    task.corpus.push_back({"d" + std::to_string(d), Render(doc_concepts.back(), task.synonyms, false)});
  }
  const auto targets = Choose(rng, cfg.docs, cfg.queries);
  for (std::size_t q = 0; q < cfg.queries; ++q) {
    const auto& concepts = doc_concepts[targets[q]];
    // Resample until the target is the only document holding every picked concept.
    std::vector<std::size_t> picked;
    for (int attempt = 0; attempt < 64; ++attempt) {
      picked.clear();
      for (std::size_t i : Choose(rng, concepts.size(), cfg.terms_per_query)) {
        picked.push_back(concepts[i]);
      }
      const bool unique = std::none_of(
          doc_concepts.begin(), doc_concepts.end(), [&](const std::vector<std::size_t>& other) {
            if (&other == &concepts) return false;
            return std::all_of(picked.begin(), picked.end(), [&](std::size_t c) {
              return std::find(other.begin(), other.end(), c) != other.end();
            });
          });
      if (unique) break;
    }
    const std::string qid = "q" + std::to_string(q);
    task.queries.push_back({qid, Render(picked, task.synonyms, true)});
    task.qrels[qid][task.corpus[targets[q]].id] = 1;
  }

  for (std::size_t p = 0; p < cfg.train_pairs; ++p) {
    const auto concepts = Choose(rng, cfg.concepts, cfg.terms_per_doc);
    std::vector<std::size_t> picked;
    for (std::size_t i : Choose(rng, concepts.size(), cfg.terms_per_query)) {
      picked.push_back(concepts[i]);
    }
    task.train_pairs.emplace_back(Render(picked, task.synonyms, true),
                                  Render(concepts, task.synonyms, false));
  }
  return task;
}

void WriteSynonymTask(const SynonymTask& task, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "qrels");
  std::vector<std::string> lines;
  for (const auto& d : task.corpus) {
    nlohmann::ordered_json j{{"_id", d.id}, {"title", ""}, {"text", d.text}};
    lines.push_back(j.dump());
  }
  WriteLines(dir / "corpus.jsonl", lines);

  lines.clear();
  for (const auto& q : task.queries) {
    nlohmann::ordered_json j{{"_id", q.id}, {"text", q.text}};
    lines.push_back(j.dump());
  }
  WriteLines(dir / "queries.jsonl", lines);

  lines = {"query-id\tcorpus-id\tscore"};
  for (const auto& [qid, judged] : task.qrels) {
    for (const auto& [doc, grade] : judged) {
      lines.push_back(qid + "\t" + doc + "\t" + std::to_string(grade));
    }
  }
  WriteLines(dir / "qrels" / "test.tsv", lines);

  lines.clear();
  for (const auto& [query, positive] : task.train_pairs) {
    nlohmann::ordered_json j{{"query", query}, {"positive", positive}};
    lines.push_back(j.dump());
  }
  WriteLines(dir / "train_pairs.jsonl", lines);

  nlohmann::ordered_json mix;
  mix["sources"] = nlohmann::ordered_json::array(
      {{{"name", "synonym_pairs"}, {"path", "train_pairs.jsonl"}, {"weight", 1.0}}});
  WriteLines(dir / "mix.json", {mix.dump(2)});
}

}  // namespace sparse_forge
