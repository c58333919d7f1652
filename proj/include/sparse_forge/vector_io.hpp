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

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparse_forge/sparse_vector.hpp"

namespace sparse_forge {

struct NamedVector {
  std::string id;
  SparseVector vector;
};

// One JSON object per line: {"id": "...", "vector": {"<term>": weight, ...}}.
// Terms are written in ascending order with round-trip precision.
std::string FormatVectorLine(const NamedVector& v);
NamedVector ParseVectorLine(const std::string& line);

void WriteVectors(const std::filesystem::path& path, const std::vector<NamedVector>& vectors);
std::vector<NamedVector> ReadVectors(const std::filesystem::path& path);

}  // namespace sparse_forge
