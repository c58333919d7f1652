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

// sparse-forge: command-line front end over the sparse_forge C API.
//
//   sparse-forge [--config F] [--threads N] <subcommand> [flags]
//
// Exit codes: 0 success, 1 usage error, 2 data/format error.

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sparse_forge/sparse_forge.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

void LogLine(const std::string& line) { std::cerr << "[sparse-forge] " << line << '\n'; }

void LogCallback(const char* line, void*) { LogLine(line); }

int StatusExit(sf_status status) {
  if (status == SF_OK) return kExitOk;
  LogLine(std::string("error: ") + sf_last_error());
  return status == SF_ERR_INVALID_ARGUMENT ? kExitUsage : kExitData;
}

struct UsageError {
  std::string message;
};

std::string JsonScalarToString(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  return v.dump();
}

// Fills options absent from argv with values from the config file section.
void ApplyConfigSection(CLI::App* app, const nlohmann::json& section, const std::string& where) {
  if (!section.is_object()) throw UsageError{where + " must be a JSON object"};
  for (const auto& [key, value] : section.items()) {
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError{"unknown key \"" + key + "\" in " + where};
    if (opt->count() > 0) continue;  // command line wins
    std::vector<std::string> values;
    if (value.is_array()) {
      for (const auto& v : value) values.push_back(JsonScalarToString(v));
    } else {
      values.push_back(JsonScalarToString(value));
    }
    try {
      opt->add_result(values);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError{"bad value for \"" + key + "\" in " + where + ": " + e.what()};
    }
  }
}

nlohmann::ordered_json ResolvedOptions(const CLI::App* app) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_name() == "--help" || opt->get_name() == "-h,--help") continue;
    const std::string name = opt->get_single_name();
    if (name == "help") continue;
    if (!opt->results().empty()) {
      if (opt->get_expected_max() > 1) {
        j[name] = opt->results();
      } else {
        j[name] = opt->results().back();
      }
    } else {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

void RequireSet(const std::map<std::string, const std::string*>& required) {
  for (const auto& [flag, value] : required) {
    if (value->empty()) throw UsageError{"missing required option --" + flag};
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned sparse retrieval toolkit: vocabulary, training, encoding, indexing, "
               "search and evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t threads = 0;
  app.add_option("--config", config_path, "JSON file with per-subcommand option defaults");
  app.add_option("--threads", threads, "Worker threads (default: SPARSE_FORGE_THREADS or 1)");

  // build-vocab
  auto* vocab_cmd = app.add_subcommand("build-vocab", "Build a vocabulary from JSONL text files");
  std::vector<std::string> vocab_corpus;
  std::int64_t min_freq = 1;
  std::int64_t max_vocab = 5000;
  std::string vocab_out;
  vocab_cmd->add_option("--corpus", vocab_corpus, "Corpus/query/pair JSONL file (repeatable)");
  vocab_cmd->add_option("--min-freq", min_freq, "Minimum word frequency")->capture_default_str();
  vocab_cmd->add_option("--max-vocab", max_vocab, "Vocabulary size cap including <unk>")
      ->capture_default_str();
  vocab_cmd->add_option("--out", vocab_out, "Output vocabulary file");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train an encoder on a dataset mix");
  std::string train_vocab, train_mix, train_enc_cfg, train_cfg, train_ckpt, train_metrics;
  train_cmd->add_option("--vocab", train_vocab, "Vocabulary file");
  train_cmd->add_option("--mix", train_mix, "Dataset mix manifest (JSON)");
  train_cmd->add_option("--encoder-config", train_enc_cfg, "Encoder config (JSON)");
  train_cmd->add_option("--train-config", train_cfg, "Training config (JSON)");
  train_cmd->add_option("--out-checkpoint", train_ckpt, "Output checkpoint");
  train_cmd->add_option("--metrics", train_metrics, "Per-step metrics JSONL");

  // encode
  auto* encode_cmd = app.add_subcommand("encode", "Encode queries or documents to sparse vectors");
  std::string enc_ckpt, enc_vocab, enc_input, enc_out;
  std::string enc_mode = "doc";
  std::string enc_echo = "on";
  encode_cmd->add_option("--checkpoint", enc_ckpt, "Encoder checkpoint");
  encode_cmd->add_option("--vocab", enc_vocab, "Vocabulary file");
  encode_cmd->add_option("--input", enc_input, "Queries or corpus JSONL");
  encode_cmd->add_option("--mode", enc_mode, "Input convention")
      ->check(CLI::IsMember({"query", "doc"}))
      ->capture_default_str();
  encode_cmd->add_option("--echo", enc_echo, "Echo (duplicated-input) encoding")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  encode_cmd->add_option("--out", enc_out, "Output sparse-vector JSONL");

  // index
  auto* index_cmd = app.add_subcommand("index", "Build an inverted index from sparse vectors");
  std::string idx_vectors, idx_out;
  std::uint64_t idx_vocab_size = 0;
  index_cmd->add_option("--vectors", idx_vectors, "Document sparse-vector JSONL");
  index_cmd->add_option("--out", idx_out, "Output index file");
  index_cmd->add_option("--vocab-size", idx_vocab_size, "Vocabulary size (0: infer)")
      ->capture_default_str();

  // search
  auto* search_cmd = app.add_subcommand("search", "Top-k search for query vectors");
  std::string s_index, s_queries, s_run;
  std::size_t s_k = 100;
  std::string s_algo = "maxscore";
  std::string s_tag = "sparse_forge";
  search_cmd->add_option("--index", s_index, "Index file");
  search_cmd->add_option("--queries", s_queries, "Query sparse-vector JSONL");
  search_cmd->add_option("--k", s_k, "Results per query")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  search_cmd->add_option("--out-run", s_run, "Output TREC run file");
  search_cmd->add_option("--algo", s_algo, "Search algorithm")
      ->check(CLI::IsMember({"exhaustive", "maxscore"}))
      ->capture_default_str();
  search_cmd->add_option("--tag", s_tag, "Run tag column")->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a TREC run against BEIR qrels");
  std::string e_run, e_qrels, e_out;
  std::string e_metrics = "ndcg,recall,mrr";
  std::string e_k = "10";
  eval_cmd->add_option("--run", e_run, "TREC run file");
  eval_cmd->add_option("--qrels", e_qrels, "Qrels TSV");
  eval_cmd->add_option("--metrics", e_metrics, "Comma list of ndcg, recall, mrr")
      ->capture_default_str();
  eval_cmd->add_option("--k", e_k, "Comma list of cutoffs")->capture_default_str();
  eval_cmd->add_option("--out", e_out, "Report JSON (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path, std::ios::binary);
      if (!in) {
        LogLine("error: cannot open config " + config_path);
        return kExitData;
      }
      nlohmann::json cfg;
      try {
        cfg = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        LogLine(std::string("error: config ") + config_path + ": " + e.what());
        return kExitData;
      }
      if (!cfg.is_object()) throw UsageError{"config file must hold a JSON object"};
      for (const auto& [key, value] : cfg.items()) {
        if (key == "threads") {
          if (app.get_option("--threads")->count() == 0) {
            ApplyConfigSection(&app, nlohmann::json{{"threads", value}}, "config");
          }
        } else if (CLI::App* sub = app.get_subcommand_no_throw(key)) {
          if (sub == cmd) ApplyConfigSection(sub, value, "config section \"" + key + "\"");
        } else {
          throw UsageError{"unknown config key \"" + key + "\""};
        }
      }
    }

    if (threads == 0) {
      // Same fallback the library applies; resolved here so the log shows it.
      const char* env = std::getenv("SPARSE_FORGE_THREADS");
      std::size_t parsed = 0;
      if (env != nullptr) {
        const std::string_view text(env);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
        if (ec != std::errc() || ptr != text.data() + text.size()) parsed = 0;
      }
      threads = parsed > 0 ? parsed : 1;
    }

    nlohmann::ordered_json resolved;
    resolved["subcommand"] = cmd->get_name();
    resolved["threads"] = threads;
    resolved["options"] = ResolvedOptions(cmd);
    LogLine("config " + resolved.dump());

    const std::string name = cmd->get_name();
    if (name == "build-vocab") {
      if (vocab_corpus.empty()) throw UsageError{"missing required option --corpus"};
      RequireSet({{"out", &vocab_out}});
      std::vector<const char*> paths;
      for (const auto& p : vocab_corpus) paths.push_back(p.c_str());
      sf_vocab* vocab = nullptr;
      sf_status st = sf_vocab_build(paths.data(), paths.size(), min_freq, max_vocab, &vocab);
      if (st == SF_OK) {
        st = sf_vocab_save(vocab, vocab_out.c_str());
        LogLine("vocabulary size " + std::to_string(sf_vocab_size(vocab)));
      }
      sf_vocab_free(vocab);
      return StatusExit(st);
    }
    if (name == "train") {
      RequireSet({{"vocab", &train_vocab}, {"mix", &train_mix}, {"out-checkpoint", &train_ckpt}});
      return StatusExit(sf_train(
          train_vocab.c_str(), train_mix.c_str(),
          train_enc_cfg.empty() ? nullptr : train_enc_cfg.c_str(),
          train_cfg.empty() ? nullptr : train_cfg.c_str(), train_ckpt.c_str(),
          train_metrics.empty() ? nullptr : train_metrics.c_str(), threads, LogCallback,
          nullptr));
    }
    if (name == "encode") {
      RequireSet({{"checkpoint", &enc_ckpt}, {"vocab", &enc_vocab}, {"input", &enc_input},
                  {"out", &enc_out}});
      sf_encoder* encoder = nullptr;
      sf_status st = sf_encoder_load(enc_ckpt.c_str(), enc_vocab.c_str(), &encoder);
      if (st == SF_OK) {
        st = sf_encode_file(encoder, enc_input.c_str(),
                            enc_mode == "query" ? SF_INPUT_QUERY : SF_INPUT_DOC,
                            enc_echo == "on" ? 1 : 0, enc_out.c_str(), threads);
      }
      sf_encoder_free(encoder);
      return StatusExit(st);
    }
    if (name == "index") {
      RequireSet({{"vectors", &idx_vectors}, {"out", &idx_out}});
      sf_index* index = nullptr;
      sf_status st = sf_index_build_from_file(idx_vectors.c_str(), idx_vocab_size, &index);
      if (st == SF_OK) {
        st = sf_index_save(index, idx_out.c_str());
        LogLine("indexed " + std::to_string(sf_index_doc_count(index)) + " documents");
      }
      sf_index_free(index);
      return StatusExit(st);
    }
    if (name == "search") {
      RequireSet({{"index", &s_index}, {"queries", &s_queries}, {"out-run", &s_run}});
      sf_index* index = nullptr;
      sf_status st = sf_index_load(s_index.c_str(), &index);
      if (st == SF_OK) {
        st = sf_search_file(index, s_queries.c_str(), s_k,
                            s_algo == "maxscore" ? SF_SEARCH_MAXSCORE : SF_SEARCH_EXHAUSTIVE,
                            s_run.c_str(), s_tag.c_str(), threads);
      }
      sf_index_free(index);
      return StatusExit(st);
    }
    if (name == "eval") {
      RequireSet({{"run", &e_run}, {"qrels", &e_qrels}});
      char* report = nullptr;
      const sf_status st =
          sf_evaluate_files(e_run.c_str(), e_qrels.c_str(), e_metrics.c_str(), e_k.c_str(),
                            e_out.empty() ? nullptr : e_out.c_str(), &report);
      if (st == SF_OK && e_out.empty()) std::cout << report << '\n';
      sf_string_free(report);
      return StatusExit(st);
    }
  } catch (const UsageError& e) {
    LogLine("usage error: " + e.message);
    return kExitUsage;
  }
  return kExitUsage;
}
