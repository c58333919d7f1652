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

/*
 * C interface to the sparse_forge shared library.
 *
 * Objects are opaque handles created by *_build / *_load and released with
 * the matching *_free. Every fallible call returns an sf_status; on failure
 * sf_last_error() describes the problem (thread-local, valid until the next
 * failing call on the same thread).
 */
#ifndef SPARSE_FORGE_H_
#define SPARSE_FORGE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SF_API __declspec(dllexport)
#else
#define SF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
  SF_OK = 0,
  SF_ERR_INVALID_ARGUMENT = 1,
  SF_ERR_FORMAT = 2,
  SF_ERR_IO = 3,
  SF_ERR_NUMERIC = 4,
  SF_ERR_INTERNAL = 5
} sf_status;

typedef enum sf_search_algo { SF_SEARCH_EXHAUSTIVE = 0, SF_SEARCH_MAXSCORE = 1 } sf_search_algo;

/* Input convention for sf_encode_file: queries are {"_id","text"}, documents
 * {"_id","title","text"}. */
typedef enum sf_input_mode { SF_INPUT_QUERY = 0, SF_INPUT_DOC = 1 } sf_input_mode;

typedef struct sf_vocab sf_vocab;
typedef struct sf_encoder sf_encoder;
typedef struct sf_index sf_index;

/* Receives human-readable log lines (no trailing newline). */
typedef void (*sf_log_fn)(const char* line, void* user);

SF_API const char* sf_version(void);
SF_API const char* sf_last_error(void);
SF_API void sf_string_free(char* s);

/* ---- vocabulary ---- */

/* Counts words over every string field among "title", "text", "query" and
 * "positive" of each JSONL line in the given files. */
SF_API sf_status sf_vocab_build(const char* const* corpus_paths, size_t path_count,
                                int64_t min_freq, int64_t max_vocab, sf_vocab** out);
SF_API sf_status sf_vocab_load(const char* path, sf_vocab** out);
SF_API sf_status sf_vocab_save(const sf_vocab* vocab, const char* path);
SF_API size_t sf_vocab_size(const sf_vocab* vocab);
/* 0 (the <unk> id) for unknown tokens. */
SF_API uint32_t sf_vocab_lookup(const sf_vocab* vocab, const char* token);
SF_API void sf_vocab_free(sf_vocab* vocab);

/* ---- training ---- */

/* Trains from a mix manifest and writes the checkpoint plus the per-step
 * metrics JSONL. encoder_config_path / train_config_path may be NULL for
 * defaults; an encoder config without "vocab_size" takes the vocabulary's
 * size. threads == 0 falls back to SPARSE_FORGE_THREADS, then 1. */
SF_API sf_status sf_train(const char* vocab_path, const char* mix_path,
                          const char* encoder_config_path, const char* train_config_path,
                          const char* out_checkpoint_path, const char* metrics_path,
                          size_t threads, sf_log_fn log, void* log_user);

/* ---- encoder ---- */

SF_API sf_status sf_encoder_load(const char* checkpoint_path, const char* vocab_path,
                                 sf_encoder** out);
SF_API void sf_encoder_free(sf_encoder* encoder);

/* Writes up to capacity (term, weight) pairs. *count always receives the
 * vector's size; SF_ERR_INVALID_ARGUMENT when capacity is too small. */
SF_API sf_status sf_encoder_encode(const sf_encoder* encoder, const char* text, int echo,
                                   uint32_t* terms, double* weights, size_t capacity,
                                   size_t* count);

/* Encodes a queries/corpus JSONL file to sparse-vector JSONL. */
SF_API sf_status sf_encode_file(const sf_encoder* encoder, const char* input_path,
                                sf_input_mode mode, int echo, const char* out_path,
                                size_t threads);

/* ---- index ---- */

/* vocab_size == 0 infers it as the largest term id + 1. */
SF_API sf_status sf_index_build_from_file(const char* vectors_path, uint64_t vocab_size,
                                          sf_index** out);
SF_API sf_status sf_index_load(const char* path, sf_index** out);
SF_API sf_status sf_index_save(const sf_index* index, const char* path);
SF_API size_t sf_index_doc_count(const sf_index* index);
/* NULL when ordinal is out of range. Owned by the index. */
SF_API const char* sf_index_doc_id(const sf_index* index, uint32_t ordinal);
SF_API void sf_index_free(sf_index* index);

/* Query terms must be strictly ascending with positive weights. Output
 * buffers must hold k entries; *count receives the number of hits. */
SF_API sf_status sf_index_search(const sf_index* index, const uint32_t* terms,
                                 const double* weights, size_t term_count, size_t k,
                                 sf_search_algo algo, uint32_t* out_ordinals,
                                 double* out_scores, size_t* count);

/* Searches every query vector of a sparse-vector JSONL file and writes a TREC
 * run file. */
SF_API sf_status sf_search_file(const sf_index* index, const char* query_vectors_path, size_t k,
                                sf_search_algo algo, const char* out_run_path, const char* tag,
                                size_t threads);

/* ---- evaluation ---- */

/* metrics: comma list of ndcg, recall, mrr. cutoffs: comma list of k values.
 * *report_json receives a JSON object keyed "<metric>@<k>" with "mean" and
 * "per_query"; free it with sf_string_free. report_path may be NULL. */
SF_API sf_status sf_evaluate_files(const char* run_path, const char* qrels_path,
                                   const char* metrics, const char* cutoffs,
                                   const char* report_path, char** report_json);

/* ---- fixtures ---- */

/* Writes a synthetic synonym-mismatch task (corpus, queries, qrels, training
 * pairs, mix manifest) into out_dir. */
SF_API sf_status sf_generate_synonym_task(const char* out_dir, uint64_t seed, size_t docs,
                                          size_t queries, size_t train_pairs);

#ifdef __cplusplus
}
#endif

#endif  // SPARSE_FORGE_H_
