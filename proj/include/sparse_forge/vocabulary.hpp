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
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sparse_forge {

using TokenId = std::uint32_t;
inline constexpr TokenId kUnkId = 0;
inline constexpr std::string_view kUnkToken = "<unk>";

// Lowercased alphanumeric runs. Bytes >= 0x80 count as word characters so that
// UTF-8 words are kept whole.
std::vector<std::string> SplitWords(std::string_view text);

class Vocabulary {
 public:
  // Vocabulary holding only <unk>.
  Vocabulary();

  // tokens[0] must be "<unk>"; the rest must be unique and non-empty.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }

  // kUnkId for unknown words.
  TokenId Lookup(std::string_view token) const;
  const std::string& TokenOf(TokenId id) const;

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // Plain text, one token per line, line number = id.
  void Save(const std::filesystem::path& path) const;
  static Vocabulary Load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Words with frequency >= min_freq, most frequent first (ties lexicographic),
// capped at max_vocab - 1 entries plus <unk>. Throws ContractError on an empty
// corpus or max_vocab < 1.
Vocabulary BuildVocabulary(const std::vector<std::string>& corpus_texts, std::int64_t min_freq,
                           std::int64_t max_vocab);

// Lowercase, split, drop out-of-vocabulary words, truncate to max_len. Throws
// FormatError("untokenizable input") when nothing is left.
std::vector<TokenId> Tokenize(std::string_view text, const Vocabulary& vocab,
                              std::size_t max_len);

}  // namespace sparse_forge
