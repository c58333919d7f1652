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

#include "sparse_forge/vocabulary.hpp"

#include <algorithm>
#include <fstream>

#include "sparse_forge/error.hpp"

namespace sparse_forge {
namespace {

bool IsWordByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;
}

}  // namespace

std::vector<std::string> SplitWords(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsWordByte(c)) {
      current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{std::string(kUnkToken)}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty() || tokens_[0] != kUnkToken) {
    throw FormatError("vocabulary must start with " + std::string(kUnkToken));
  }
  ids_.reserve(tokens_.size());
  for (std::size_t i = 1; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw FormatError("empty token at id " + std::to_string(i));
    if (!ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw FormatError("duplicate token \"" + tokens_[i] + "\"");
    }
  }
}

TokenId Vocabulary::Lookup(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::TokenOf(TokenId id) const {
  if (id >= tokens_.size()) throw ContractError("token id " + std::to_string(id) + " out of range");
  return tokens_[id];
}

void Vocabulary::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& t : tokens_) out << t << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

Vocabulary Vocabulary::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  try {
    return Vocabulary(std::move(tokens));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Vocabulary BuildVocabulary(const std::vector<std::string>& corpus_texts, std::int64_t min_freq,
                           std::int64_t max_vocab) {
  if (corpus_texts.empty()) throw ContractError("build_vocab: empty corpus");
  if (max_vocab < 1) throw ContractError("build_vocab: max_vocab must be >= 1");
  std::unordered_map<std::string, std::int64_t> counts;
  for (const auto& text : corpus_texts) {
    for (auto& w : SplitWords(text)) ++counts[std::move(w)];
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked;
  for (auto& [word, n] : counts) {
    if (n >= min_freq) ranked.emplace_back(word, n);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  const auto cap = static_cast<std::size_t>(max_vocab - 1);
  if (ranked.size() > cap) ranked.resize(cap);

  std::vector<std::string> tokens{std::string(kUnkToken)};
  for (auto& [word, n] : ranked) tokens.push_back(std::move(word));
  return Vocabulary(std::move(tokens));
}

std::vector<TokenId> Tokenize(std::string_view text, const Vocabulary& vocab,
                              std::size_t max_len) {
  std::vector<TokenId> ids;
  for (const auto& w : SplitWords(text)) {
    if (ids.size() == max_len) break;
    const TokenId id = vocab.Lookup(w);
    if (id != kUnkId) ids.push_back(id);
  }
  if (ids.empty()) throw FormatError("untokenizable input");
  return ids;
}

}  // namespace sparse_forge
