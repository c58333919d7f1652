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

#include "sparse_forge/dataset_mix.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

#include "sparse_forge/error.hpp"

namespace sparse_forge {

DatasetMix::DatasetMix(std::vector<MixSource> sources) : sources_(std::move(sources)) {
  if (sources_.empty()) throw ContractError("dataset mix: no sources");
  double total = 0.0;
  for (const auto& s : sources_) {
    if (!(s.weight > 0.0) || !std::isfinite(s.weight)) {
      throw ContractError("dataset mix: source \"" + s.name + "\" needs a positive weight");
    }
    if (s.pairs.empty()) throw ContractError("dataset mix: source \"" + s.name + "\" is empty");
    total += s.weight;
  }
  double running = 0.0;
  for (const auto& s : sources_) {
    probabilities_.push_back(s.weight / total);
    running += s.weight;
    cumulative_.push_back(running / total);
  }
  cumulative_.back() = 1.0;
}

std::size_t DatasetMix::SampleSource(Rng& rng) const {
  const double u = rng.Uniform01();
  for (std::size_t i = 0; i < cumulative_.size(); ++i) {
    if (u < cumulative_[i]) return i;
  }
  return cumulative_.size() - 1;
}

std::vector<TextPair> ReadPairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<TextPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("query") || !j["query"].is_string() ||
        !j.contains("positive") || !j["positive"].is_string()) {
      throw FormatError(where + ": pair needs string \"query\" and \"positive\"");
    }
    pairs.emplace_back(j["query"].get<std::string>(), j["positive"].get<std::string>());
  }
  return pairs;
}

DatasetMix LoadDatasetMix(const std::filesystem::path& manifest) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw IoError("cannot open " + manifest.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(manifest.string() + ": invalid JSON: " + e.what());
  }
  if (!j.is_object() || !j.contains("sources") || !j["sources"].is_array()) {
    throw FormatError(manifest.string() + ": expected {\"sources\": [...]}");
  }
  const auto base = manifest.parent_path();
  std::vector<MixSource> sources;
  for (const auto& s : j["sources"]) {
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string() || !s.contains("path") ||
        !s["path"].is_string() || !s.contains("weight") || !s["weight"].is_number()) {
      throw FormatError(manifest.string() + ": source needs \"name\", \"path\", \"weight\"");
    }
    MixSource src;
    src.name = s["name"].get<std::string>();
    src.path = s["path"].get<std::string>();
    if (src.path.is_relative()) src.path = base / src.path;
    src.weight = s["weight"].get<double>();
    src.pairs = ReadPairs(src.path);
    if (src.pairs.empty()) throw FormatError(src.path.string() + ": pair file is empty");
    sources.push_back(std::move(src));
  }
  try {
    return DatasetMix(std::move(sources));
  } catch (const ContractError& e) {
    throw FormatError(manifest.string() + ": " + e.what());
  }
}

TrainingBatch SampleBatch(const DatasetMix& mix, Rng& rng, std::size_t batch_size) {
  TrainingBatch batch;
  batch.pairs.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const auto& src = mix.sources()[mix.SampleSource(rng)];
    batch.pairs.push_back(src.pairs[rng.Below(src.pairs.size())]);
  }
  return batch;
}

}  // namespace sparse_forge
