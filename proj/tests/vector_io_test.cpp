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

#include "sparse_forge/vector_io.hpp"

#include <gtest/gtest.h>

#include "sparse_forge/error.hpp"
#include "test_support.hpp"

namespace sparse_forge {
namespace {

TEST(VectorIoTest, FormatsAscendingStringKeys) {
  const NamedVector v{"d7", SparseVector::FromEntries({{3, 0.5}, {12, 2.0}})};
  EXPECT_EQ(FormatVectorLine(v), R"({"id":"d7","vector":{"3":0.5,"12":2.0}})");
  EXPECT_EQ(FormatVectorLine({"e", {}}), R"({"id":"e","vector":{}})");
}

TEST(VectorIoTest, ParsesUnorderedKeysAndDropsZeros) {
  const auto v = ParseVectorLine(R"({"id":"q","vector":{"9":1.25,"2":0.0,"4":3}})");
  EXPECT_EQ(v.id, "q");
  EXPECT_EQ(v.vector, SparseVector::FromEntries({{4, 3.0}, {9, 1.25}}));
}

TEST(VectorIoTest, RejectsMalformedRecords) {
  EXPECT_THROW(ParseVectorLine("not json"), FormatError);
  EXPECT_THROW(ParseVectorLine(R"({"vector":{}})"), FormatError);
  EXPECT_THROW(ParseVectorLine(R"({"id":1,"vector":{}})"), FormatError);
  EXPECT_THROW(ParseVectorLine(R"({"id":"a","vector":{"x":1.0}})"), FormatError);
  EXPECT_THROW(ParseVectorLine(R"({"id":"a","vector":{"-1":1.0}})"), FormatError);
  EXPECT_THROW(ParseVectorLine(R"({"id":"a","vector":{"1":-1.0}})"), FormatError);
  EXPECT_THROW(ParseVectorLine(R"({"id":"a","vector":{"1":"2"}})"), FormatError);
}

TEST(VectorIoTest, FileRoundTripIsExact) {
  testing::TempDir dir;
  Rng rng(21);
  std::vector<NamedVector> vectors;
  for (int i = 0; i < 50; ++i) {
    vectors.push_back({"doc" + std::to_string(i), testing::RandomSparse(rng, 300, rng.Below(25))});
  }
  WriteVectors(dir / "v.jsonl", vectors);
  const auto back = ReadVectors(dir / "v.jsonl");
  ASSERT_EQ(back.size(), vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    EXPECT_EQ(back[i].id, vectors[i].id);
    EXPECT_EQ(back[i].vector, vectors[i].vector);
  }
}

TEST(VectorIoTest, ReadErrorNamesLine) {
  testing::TempDir dir;
  testing::WriteText(dir / "bad.jsonl", "{\"id\":\"a\",\"vector\":{}}\n{oops\n");
  try {
    ReadVectors(dir / "bad.jsonl");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ReadVectors(dir / "missing.jsonl"), IoError);
}

}  // namespace
}  // namespace sparse_forge
