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

#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <map>

#include "sparse_forge/error.hpp"
#include "test_support.hpp"

namespace sparse_forge {
namespace {

// Reference splitter: runs of ASCII alphanumerics (and non-ASCII bytes), lowercased.
std::vector<std::string> SplitOracle(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  return words;
}

TEST(VocabularyTest, BuildOrdersByFrequency) {
  const auto vocab = BuildVocabulary({"a a b"}, 1, 100);
  ASSERT_EQ(vocab.size(), 3u);
  EXPECT_EQ(vocab.TokenOf(0), "<unk>");
  EXPECT_EQ(vocab.Lookup("a"), 1u);
  EXPECT_EQ(vocab.Lookup("b"), 2u);
}

TEST(VocabularyTest, MinFrequencyFilters) {
  const auto vocab = BuildVocabulary({"x"}, 2, 100);
  EXPECT_EQ(vocab.size(), 1u);
  EXPECT_EQ(vocab.Lookup("x"), kUnkId);
}

TEST(VocabularyTest, EmptyCorpusIsAnError) {
  EXPECT_THROW(BuildVocabulary({}, 1, 10), ContractError);
}

TEST(VocabularyTest, MatchesFrequencyOracleOnSyntheticDocs) {
  Rng rng(31);
  std::vector<std::string> docs;
  for (int d = 0; d < 1000; ++d) {
    std::string text;
    const auto len = 3 + rng.Below(10);
    for (std::uint64_t w = 0; w < len; ++w) {
      // Zipf-ish skew so frequencies tie and differ.
      const auto id = rng.Below(1 + rng.Below(400));
      text += (w ? " " : "") + std::string("w") + std::to_string(id);
      if (rng.Below(5) == 0) text += ",";
    }
    docs.push_back(text);
  }
  constexpr std::int64_t kMinFreq = 3;
  constexpr std::int64_t kMax = 150;
  const auto vocab = BuildVocabulary(docs, kMinFreq, kMax);

  std::map<std::string, std::int64_t> freq;
  for (const auto& d : docs) {
    for (const auto& w : SplitOracle(d)) ++freq[w];
  }
  std::vector<std::pair<std::string, std::int64_t>> ranked;
  for (const auto& [w, f] : freq) {
    if (f >= kMinFreq) ranked.emplace_back(w, f);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > static_cast<std::size_t>(kMax - 1)) ranked.resize(kMax - 1);

  ASSERT_EQ(vocab.size(), ranked.size() + 1);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    EXPECT_EQ(vocab.TokenOf(static_cast<TokenId>(i + 1)), ranked[i].first);
  }
}

TEST(VocabularyTest, LookupInvertsTokenOf) {
  const auto vocab = BuildVocabulary({"the cat sat on the mat", "a dog"}, 1, 100);
  for (TokenId id = 1; id < vocab.size(); ++id) EXPECT_EQ(vocab.Lookup(vocab.TokenOf(id)), id);
  EXPECT_EQ(vocab.Lookup("zebra"), kUnkId);
  EXPECT_THROW(vocab.TokenOf(static_cast<TokenId>(vocab.size())), ContractError);
}

TEST(VocabularyTest, SaveLoadRoundTrip) {
  testing::TempDir dir;
  const auto vocab = BuildVocabulary({"alpha beta beta gamma"}, 1, 100);
  vocab.Save(dir / "vocab.txt");
  EXPECT_EQ(testing::ReadText(dir / "vocab.txt"), "<unk>\nbeta\nalpha\ngamma\n");
  const auto back = Vocabulary::Load(dir / "vocab.txt");
  EXPECT_EQ(back.tokens(), vocab.tokens());
}

TEST(VocabularyTest, LoadRejectsBadFiles) {
  testing::TempDir dir;
  testing::WriteText(dir / "nounk.txt", "a\nb\n");
  EXPECT_THROW(Vocabulary::Load(dir / "nounk.txt"), FormatError);
  testing::WriteText(dir / "dup.txt", "<unk>\na\na\n");
  EXPECT_THROW(Vocabulary::Load(dir / "dup.txt"), FormatError);
  EXPECT_THROW(Vocabulary::Load(dir / "absent.txt"), IoError);
}

TEST(TokenizeTest, LowercasesAndSplitsOnPunctuation) {
  const Vocabulary vocab({"<unk>", "hello", "world"});
  EXPECT_EQ(Tokenize("Hello, world", vocab, 16), (std::vector<TokenId>{1, 2}));
}

TEST(TokenizeTest, AllOovIsUntokenizable) {
  const Vocabulary vocab({"<unk>", "hello"});
  EXPECT_THROW(Tokenize("nothing known here", vocab, 16), FormatError);
  EXPECT_THROW(Tokenize("", vocab, 16), FormatError);
}

TEST(TokenizeTest, DropsOovAndTruncates) {
  const Vocabulary vocab({"<unk>", "a", "b", "c"});
  EXPECT_EQ(Tokenize("a x b y c a", vocab, 3), (std::vector<TokenId>{1, 2, 3}));
}

TEST(TokenizeTest, MatchesSplitAndLookupOracle) {
  const std::string line = "Re: The QUICK--brown fox (v2.0) jumped; over_the lazy-dog's 3rd bone!!";
  const auto words = SplitOracle(line);
  const auto vocab = BuildVocabulary({line, "unrelated filler words"}, 1, 1000);
  std::vector<TokenId> expected;
  for (const auto& w : words) expected.push_back(vocab.Lookup(w));
  EXPECT_EQ(Tokenize(line, vocab, 100), expected);
  EXPECT_EQ(SplitWords(line), words);
}

}  // namespace
}  // namespace sparse_forge
