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

#include "sparse_forge/sparse_forge.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "sparse_forge/encoder.hpp"
#include "sparse_forge/error.hpp"
#include "sparse_forge/eval.hpp"
#include "sparse_forge/index.hpp"
#include "sparse_forge/parallel.hpp"
#include "sparse_forge/synth.hpp"
#include "sparse_forge/trainer.hpp"
#include "sparse_forge/vector_io.hpp"
#include "sparse_forge/vocabulary.hpp"

namespace sf = sparse_forge;

struct sf_vocab {
  sf::Vocabulary vocab;
};

struct sf_encoder {
  sf::EncoderParams params;
  sf::Vocabulary vocab;
};

struct sf_index {
  sf::InvertedIndex index;
};

namespace {

thread_local std::string g_last_error;

sf_status Fail(sf_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
sf_status Guard(Fn&& fn) {
  try {
    fn();
    return SF_OK;
  } catch (const sf::Error& e) {
    switch (e.kind()) {
      case sf::ErrorKind::kContract: return Fail(SF_ERR_INVALID_ARGUMENT, e.what());
      case sf::ErrorKind::kFormat: return Fail(SF_ERR_FORMAT, e.what());
      case sf::ErrorKind::kIo: return Fail(SF_ERR_IO, e.what());
      case sf::ErrorKind::kNumeric: return Fail(SF_ERR_NUMERIC, e.what());
    }
    return Fail(SF_ERR_INTERNAL, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return Fail(SF_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return Fail(SF_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(SF_ERR_INTERNAL, "unknown error");
  }
}

void Require(bool ok, const char* what) {
  if (!ok) throw sf::ContractError(what);
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sf::IoError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> SplitComma(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void Log(sf_log_fn log, void* user, const std::string& line) {
  if (log != nullptr) log(line.c_str(), user);
}

}  // namespace

extern "C" {

SF_API const char* sf_version(void) { return "0.1.0"; }

SF_API const char* sf_last_error(void) { return g_last_error.c_str(); }

SF_API void sf_string_free(char* s) { delete[] s; }

SF_API sf_status sf_vocab_build(const char* const* corpus_paths, size_t path_count,
                                int64_t min_freq, int64_t max_vocab, sf_vocab** out) {
  return Guard([&] {
    Require(out != nullptr && (corpus_paths != nullptr || path_count == 0), "null argument");
    std::vector<std::string> texts;
    for (size_t p = 0; p < path_count; ++p) {
      const std::string path = corpus_paths[p];
      std::ifstream in(path, std::ios::binary);
      if (!in) throw sf::IoError("cannot open " + path);
      std::string line;
      std::size_t line_no = 0;
      while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
          throw sf::FormatError(path + ":" + std::to_string(line_no) + ": invalid JSON: " +
                                e.what());
        }
        if (!j.is_object()) {
          throw sf::FormatError(path + ":" + std::to_string(line_no) + ": expected an object");
        }
        for (const char* key : {"title", "text", "query", "positive"}) {
          if (j.contains(key) && j[key].is_string()) texts.push_back(j[key].get<std::string>());
        }
      }
    }
    auto handle = std::make_unique<sf_vocab>();
    handle->vocab = sf::BuildVocabulary(texts, min_freq, max_vocab);
    *out = handle.release();
  });
}

SF_API sf_status sf_vocab_load(const char* path, sf_vocab** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    *out = new sf_vocab{sf::Vocabulary::Load(path)};
  });
}

SF_API sf_status sf_vocab_save(const sf_vocab* vocab, const char* path) {
  return Guard([&] {
    Require(vocab != nullptr && path != nullptr, "null argument");
    vocab->vocab.Save(path);
  });
}

SF_API size_t sf_vocab_size(const sf_vocab* vocab) {
  return vocab == nullptr ? 0 : vocab->vocab.size();
}

SF_API uint32_t sf_vocab_lookup(const sf_vocab* vocab, const char* token) {
  if (vocab == nullptr || token == nullptr) return sf::kUnkId;
  return vocab->vocab.Lookup(token);
}

SF_API void sf_vocab_free(sf_vocab* vocab) { delete vocab; }

SF_API sf_status sf_train(const char* vocab_path, const char* mix_path,
                          const char* encoder_config_path, const char* train_config_path,
                          const char* out_checkpoint_path, const char* metrics_path,
                          size_t threads, sf_log_fn log, void* log_user) {
  return Guard([&] {
    Require(vocab_path != nullptr && mix_path != nullptr && out_checkpoint_path != nullptr,
            "null argument");
    const auto vocab = sf::Vocabulary::Load(vocab_path);

    sf::EncoderConfig enc;
    bool has_vocab_size = false;
    if (encoder_config_path != nullptr) {
      const std::string text = ReadText(encoder_config_path);
      enc = sf::ParseEncoderConfig(text);
      has_vocab_size = nlohmann::json::parse(text).contains("vocab_size");
    }
    if (!has_vocab_size) enc.vocab_size = vocab.size();
    enc.Validate();

    sf::TrainConfig cfg;
    if (train_config_path != nullptr) cfg = sf::LoadTrainConfig(train_config_path);
    cfg.Validate();

    const auto mix = sf::LoadDatasetMix(mix_path);
    const std::size_t workers = sf::ResolveThreads(threads);
    Log(log, log_user, "encoder config: " + sf::EncoderConfigToJson(enc));
    Log(log, log_user, "train config: " + sf::TrainConfigToJson(cfg));
    Log(log, log_user, "mix: " + std::to_string(mix.sources().size()) + " source(s), threads " +
                           std::to_string(workers));

    const std::int64_t every = std::max<std::int64_t>(1, cfg.total_steps / 20);
    auto result = sf::Train(enc, cfg, mix, vocab, workers, [&](const sf::StepMetrics& m) {
      if (m.step % every == 0 || m.step + 1 == cfg.total_steps) {
        Log(log, log_user, "step " + sf::FormatMetricsLine(m));
      }
    });
    sf::SaveCheckpoint(result.params, out_checkpoint_path);
    if (metrics_path != nullptr) sf::WriteMetrics(metrics_path, result.metrics);
  });
}

SF_API sf_status sf_encoder_load(const char* checkpoint_path, const char* vocab_path,
                                 sf_encoder** out) {
  return Guard([&] {
    Require(checkpoint_path != nullptr && vocab_path != nullptr && out != nullptr,
            "null argument");
    auto handle = std::make_unique<sf_encoder>();
    handle->params = sf::LoadCheckpoint(checkpoint_path);
    handle->vocab = sf::Vocabulary::Load(vocab_path);
    if (handle->vocab.size() != handle->params.config.vocab_size) {
      throw sf::FormatError("vocabulary has " + std::to_string(handle->vocab.size()) +
                            " tokens but the checkpoint expects " +
                            std::to_string(handle->params.config.vocab_size));
    }
    *out = handle.release();
  });
}

SF_API void sf_encoder_free(sf_encoder* encoder) { delete encoder; }

SF_API sf_status sf_encoder_encode(const sf_encoder* encoder, const char* text, int echo,
                                   uint32_t* terms, double* weights, size_t capacity,
                                   size_t* count) {
  return Guard([&] {
    Require(encoder != nullptr && text != nullptr && count != nullptr, "null argument");
    const auto v = sf::Encode(encoder->params, encoder->vocab, text, echo != 0);
    *count = v.size();
    if (capacity < v.size()) throw sf::ContractError("output buffer too small");
    Require(v.empty() || (terms != nullptr && weights != nullptr), "null output buffer");
    for (std::size_t i = 0; i < v.size(); ++i) {
      terms[i] = v.entries()[i].term;
      weights[i] = v.entries()[i].weight;
    }
  });
}

SF_API sf_status sf_encode_file(const sf_encoder* encoder, const char* input_path,
                                sf_input_mode mode, int echo, const char* out_path,
                                size_t threads) {
  return Guard([&] {
    Require(encoder != nullptr && input_path != nullptr && out_path != nullptr,
            "null argument");
    const auto records =
        mode == SF_INPUT_DOC ? sf::ReadCorpus(input_path) : sf::ReadQueries(input_path);
    std::vector<sf::NamedVector> vectors(records.size());
    sf::ParallelFor(records.size(), sf::ResolveThreads(threads), [&](std::size_t i) {
      try {
        vectors[i] = {records[i].id,
                      sf::Encode(encoder->params, encoder->vocab, records[i].text, echo != 0)};
      } catch (const sf::FormatError& e) {
        throw sf::FormatError("record \"" + records[i].id + "\": " + e.what());
      }
    });
    sf::WriteVectors(out_path, vectors);
  });
}

SF_API sf_status sf_index_build_from_file(const char* vectors_path, uint64_t vocab_size,
                                          sf_index** out) {
  return Guard([&] {
    Require(vectors_path != nullptr && out != nullptr, "null argument");
    const auto vectors = sf::ReadVectors(vectors_path);
    std::size_t v = vocab_size;
    if (v == 0) {
      for (const auto& nv : vectors) v = std::max(v, nv.vector.min_vocab_size());
    }
    *out = new sf_index{sf::InvertedIndex::Build(vectors, v)};
  });
}

SF_API sf_status sf_index_load(const char* path, sf_index** out) {
  return Guard([&] {
    Require(path != nullptr && out != nullptr, "null argument");
    *out = new sf_index{sf::InvertedIndex::Load(path)};
  });
}

SF_API sf_status sf_index_save(const sf_index* index, const char* path) {
  return Guard([&] {
    Require(index != nullptr && path != nullptr, "null argument");
    index->index.Save(path);
  });
}

SF_API size_t sf_index_doc_count(const sf_index* index) {
  return index == nullptr ? 0 : index->index.doc_count();
}

SF_API const char* sf_index_doc_id(const sf_index* index, uint32_t ordinal) {
  if (index == nullptr || ordinal >= index->index.doc_count()) return nullptr;
  return index->index.doc_id(ordinal).c_str();
}

SF_API void sf_index_free(sf_index* index) { delete index; }

SF_API sf_status sf_index_search(const sf_index* index, const uint32_t* terms,
                                 const double* weights, size_t term_count, size_t k,
                                 sf_search_algo algo, uint32_t* out_ordinals,
                                 double* out_scores, size_t* count) {
  return Guard([&] {
    Require(index != nullptr && count != nullptr && out_ordinals != nullptr &&
                out_scores != nullptr && (term_count == 0 || (terms && weights)),
            "null argument");
    std::vector<sf::SparseEntry> entries(term_count);
    for (size_t i = 0; i < term_count; ++i) entries[i] = {terms[i], weights[i]};
    const auto query = sf::SparseVector::FromEntries(std::move(entries));
    const auto hits = index->index.Search(
        query, k, algo == SF_SEARCH_MAXSCORE ? sf::SearchAlgo::kMaxScore : sf::SearchAlgo::kExhaustive);
    for (size_t i = 0; i < hits.size(); ++i) {
      out_ordinals[i] = hits[i].ordinal;
      out_scores[i] = hits[i].score;
    }
    *count = hits.size();
  });
}

SF_API sf_status sf_search_file(const sf_index* index, const char* query_vectors_path, size_t k,
                                sf_search_algo algo, const char* out_run_path, const char* tag,
                                size_t threads) {
  return Guard([&] {
    Require(index != nullptr && query_vectors_path != nullptr && out_run_path != nullptr,
            "null argument");
    Require(k >= 1, "k must be >= 1");
    const auto queries = sf::ReadVectors(query_vectors_path);
    const auto which =
        algo == SF_SEARCH_MAXSCORE ? sf::SearchAlgo::kMaxScore : sf::SearchAlgo::kExhaustive;
    std::vector<sf::SearchResult> results(queries.size());
    sf::ParallelFor(queries.size(), sf::ResolveThreads(threads), [&](std::size_t i) {
      results[i] = index->index.Search(queries[i].vector, k, which);
    });
    sf::Run run;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      if (run.count(queries[i].id)) {
        throw sf::FormatError("duplicate query id \"" + queries[i].id + "\"");
      }
      auto& ranking = run[queries[i].id];
      for (const auto& hit : results[i]) ranking.push_back({hit.id, hit.score});
    }
    sf::NormalizeRun(run);
    sf::WriteRun(run, out_run_path, tag == nullptr ? "sparse_forge" : tag);
  });
}

SF_API sf_status sf_evaluate_files(const char* run_path, const char* qrels_path,
                                   const char* metrics, const char* cutoffs,
                                   const char* report_path, char** report_json) {
  return Guard([&] {
    Require(run_path != nullptr && qrels_path != nullptr && metrics != nullptr &&
                cutoffs != nullptr,
            "null argument");
    std::vector<std::size_t> ks;
    for (const auto& s : SplitComma(cutoffs)) {
      std::size_t pos = 0;
      long long v = 0;
      try {
        v = std::stoll(s, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != s.size() || v < 1) throw sf::ContractError("bad cutoff \"" + s + "\"");
      ks.push_back(static_cast<std::size_t>(v));
    }
    const auto names = SplitComma(metrics);
    Require(!ks.empty() && !names.empty(), "need at least one metric and one cutoff");
    for (const auto& name : names) {
      if (name != "ndcg" && name != "recall" && name != "mrr") {
        throw sf::ContractError("unknown metric \"" + name + "\"");
      }
    }

    const auto run = sf::ReadRun(run_path);
    const auto qrels = sf::ReadQrels(qrels_path);
    nlohmann::ordered_json report = nlohmann::ordered_json::object();
    for (const auto& name : names) {
      for (std::size_t k : ks) {
        const auto r = name == "ndcg"     ? sf::NdcgAtK(run, qrels, k)
                       : name == "recall" ? sf::RecallAtK(run, qrels, k)
                                          : sf::MrrAtK(run, qrels, k);
        nlohmann::ordered_json per_query = nlohmann::ordered_json::object();
        for (const auto& [qid, v] : r.per_query) per_query[qid] = v;
        report[r.name] = {{"mean", r.mean}, {"per_query", std::move(per_query)}};
      }
    }
    const std::string text = report.dump(2);
    if (report_path != nullptr) {
      std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
      if (!out) throw sf::IoError(std::string("cannot open ") + report_path + " for writing");
      out << text << '\n';
      if (!out) throw sf::IoError(std::string("write failed: ") + report_path);
    }
    if (report_json != nullptr) {
      auto* buf = new char[text.size() + 1];
      std::memcpy(buf, text.c_str(), text.size() + 1);
      *report_json = buf;
    }
  });
}

SF_API sf_status sf_generate_synonym_task(const char* out_dir, uint64_t seed, size_t docs,
                                          size_t queries, size_t train_pairs) {
  return Guard([&] {
    Require(out_dir != nullptr, "null argument");
    sf::SynonymTaskConfig cfg;
    cfg.seed = seed;
    cfg.docs = docs;
    cfg.queries = queries;
    cfg.train_pairs = train_pairs;
    sf::WriteSynonymTask(sf::GenerateSynonymTask(cfg), out_dir);
  });
}

}  // extern "C"
