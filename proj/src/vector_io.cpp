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

#include <charconv>
#include <fstream>

#include "json.hpp"

#include "sparse_forge/error.hpp"

namespace sparse_forge {

std::string FormatVectorLine(const NamedVector& v) {
  nlohmann::ordered_json weights = nlohmann::ordered_json::object();
  for (const auto& e : v.vector.entries()) weights[std::to_string(e.term)] = e.weight;
  nlohmann::ordered_json line;
  line["id"] = v.id;
  line["vector"] = std::move(weights);
  return line.dump();
}

NamedVector ParseVectorLine(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("vector") ||
      !j["vector"].is_object()) {
    throw FormatError("vector record needs string \"id\" and object \"vector\"");
  }
  NamedVector out;
  out.id = j["id"].get<std::string>();
  std::vector<SparseEntry> entries;
  for (const auto& [key, value] : j["vector"].items()) {
    TermId term = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), term);
    if (ec != std::errc() || ptr != key.data() + key.size() || key.empty()) {
      throw FormatError("term id \"" + key + "\" is not a decimal integer");
    }
    if (!value.is_number()) throw FormatError("weight for term " + key + " is not a number");
    const double w = value.get<double>();
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw FormatError("weight for term " + key + " must be finite and nonnegative");
    }
    entries.push_back({term, w});
  }
  try {
    out.vector = SparseVector::FromUnsorted(std::move(entries));
  } catch (const ContractError& e) {
    throw FormatError(e.what());
  }
  return out;
}

void WriteVectors(const std::filesystem::path& path, const std::vector<NamedVector>& vectors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& v : vectors) out << FormatVectorLine(v) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<NamedVector> ReadVectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<NamedVector> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(ParseVectorLine(line));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace sparse_forge
