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
#include <span>
#include <string>
#include <vector>

#include "sparse_forge/sparse_vector.hpp"
#include "sparse_forge/vector_io.hpp"

namespace sparse_forge {

using DocOrdinal = std::uint32_t;

struct PostingList {
  std::vector<DocOrdinal> docs;  // strictly ascending
  std::vector<float> impacts;    // parallel to docs, all > 0
  float max_impact = 0.0f;
};

struct SearchHit {
  DocOrdinal ordinal = 0;
  std::string id;
  double score = 0.0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// Hits by descending score, ties by ascending ordinal.
using SearchResult = std::vector<SearchHit>;

enum class SearchAlgo { kExhaustive, kMaxScore };

// Immutable term -> postings index over sparse vectors. Impacts are stored as
// 32-bit floats; scores accumulate in double in ascending term order.
class InvertedIndex {
 public:
  InvertedIndex() = default;

  // Ordinals follow input order. Throws FormatError on a duplicate id or a
  // term >= vocab_size.
  static InvertedIndex Build(std::span<const NamedVector> docs, std::size_t vocab_size);

  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t doc_count() const noexcept { return doc_ids_.size(); }
  const std::string& doc_id(DocOrdinal ordinal) const { return doc_ids_.at(ordinal); }

  // Terms with a non-empty list, ascending.
  std::span<const TermId> terms() const noexcept { return terms_; }
  // nullptr when the term has no postings.
  const PostingList* postings(TermId term) const;

  // Exact top-k by dot product; documents without any shared term are never
  // returned. Throws ContractError when k == 0.
  SearchResult SearchExhaustive(const SparseVector& query, std::size_t k) const;

  // MaxScore-pruned search returning exactly what SearchExhaustive returns.
  SearchResult SearchMaxScore(const SparseVector& query, std::size_t k) const;

  SearchResult Search(const SparseVector& query, std::size_t k, SearchAlgo algo) const {
    return algo == SearchAlgo::kMaxScore ? SearchMaxScore(query, k) : SearchExhaustive(query, k);
  }

  // "SPIX" v1: V, doc ids, then per term its id, list length, varint
  // doc-ordinal gaps, f32 impacts and f32 max impact. A term count precedes the
  // term records and an FNV-1a checksum of all earlier bytes trails the file.
  std::vector<std::uint8_t> Serialize() const;
  static InvertedIndex Deserialize(std::span<const std::uint8_t> bytes);
  void Save(const std::filesystem::path& path) const;
  static InvertedIndex Load(const std::filesystem::path& path);

 private:
  SearchHit MakeHit(DocOrdinal ordinal, double score) const;

  std::size_t vocab_size_ = 0;
  std::vector<std::string> doc_ids_;
  std::vector<TermId> terms_;
  std::vector<PostingList> lists_;
};

}  // namespace sparse_forge
