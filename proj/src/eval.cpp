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

#include "sparse_forge/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sparse_forge/error.hpp"

namespace sparse_forge {
namespace {

std::vector<std::string> SplitOn(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  return out;
}

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string field;
  while (ss >> field) out.push_back(field);
  return out;
}

std::ifstream OpenText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void StripCr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <typename Fn>
void ForEachJsonLine(const std::filesystem::path& path, Fn&& fn) {
  auto in = OpenText(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(line);
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(where + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw FormatError(where + ": expected a JSON object");
    fn(j, where);
  }
}

std::string RequiredString(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw FormatError(where + ": missing string field \"" + key + "\"");
  }
  return j[key].get<std::string>();
}

bool BetterRanked(const RankedDoc& a, const RankedDoc& b) {
  return a.score > b.score || (a.score == b.score && a.doc_id < b.doc_id);
}

void CheckK(std::size_t k) {
  if (k == 0) throw ContractError("metric cutoff k must be >= 1");
}

template <typename PerQuery>
MetricReport Evaluate(const std::string& name, const Run& run, const Qrels& qrels,
                      PerQuery&& per_query) {
  static const std::vector<RankedDoc> kEmpty;
  MetricReport report;
  report.name = name;
  double total = 0.0;
  for (const auto& [qid, judged] : qrels) {
    const bool has_relevant =
        std::any_of(judged.begin(), judged.end(), [](const auto& kv) { return kv.second > 0; });
    if (!has_relevant) continue;
    auto it = run.find(qid);
    const double value = per_query(it == run.end() ? kEmpty : it->second, judged);
    report.per_query[qid] = value;
    total += value;
  }
  report.mean = report.per_query.empty() ? 0.0 : total / static_cast<double>(report.per_query.size());
  return report;
}

std::int64_t GradeOf(const std::map<std::string, std::int64_t>& judged, const std::string& doc) {
  auto it = judged.find(doc);
  return it == judged.end() ? 0 : it->second;
}

}  // namespace

Qrels ReadQrels(const std::filesystem::path& path) {
  auto in = OpenText(path);
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (line_no == 1) {
      if (line != "query-id\tcorpus-id\tscore") {
        throw FormatError(where + ": expected header \"query-id<TAB>corpus-id<TAB>score\"");
      }
      continue;
    }
    if (line.empty()) continue;
    auto fields = SplitOn(line, '\t');
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw FormatError(where + ": expected 3 tab-separated fields");
    }
    std::int64_t grade = 0;
    const auto& g = fields[2];
    auto [ptr, ec] = std::from_chars(g.data(), g.data() + g.size(), grade);
    if (ec != std::errc() || ptr != g.data() + g.size() || grade < 0) {
      throw FormatError(where + ": grade must be a nonnegative integer");
    }
    qrels[fields[0]][fields[1]] = grade;
  }
  if (line_no == 0) throw FormatError(path.string() + ": empty qrels file");
  return qrels;
}

std::vector<TextRecord> ReadCorpus(const std::filesystem::path& path) {
  std::vector<TextRecord> docs;
  ForEachJsonLine(path, [&](const nlohmann::json& j, const std::string& where) {
    TextRecord r;
    r.id = RequiredString(j, "_id", where);
    const std::string text = RequiredString(j, "text", where);
    std::string title;
    if (j.contains("title")) {
      if (!j["title"].is_string()) throw FormatError(where + ": \"title\" must be a string");
      title = j["title"].get<std::string>();
    }
    r.text = title.empty() ? text : title + " " + text;
    docs.push_back(std::move(r));
  });
  return docs;
}

std::vector<TextRecord> ReadQueries(const std::filesystem::path& path) {
  std::vector<TextRecord> queries;
  ForEachJsonLine(path, [&](const nlohmann::json& j, const std::string& where) {
    queries.push_back({RequiredString(j, "_id", where), RequiredString(j, "text", where)});
  });
  return queries;
}

void NormalizeRun(Run& run) {
  for (auto& [qid, ranking] : run) {
    std::sort(ranking.begin(), ranking.end(), BetterRanked);
    std::set<std::string> seen;
    for (const auto& r : ranking) {
      if (!seen.insert(r.doc_id).second) {
        throw FormatError("run: duplicate document \"" + r.doc_id + "\" for query \"" + qid + "\"");
      }
    }
  }
}

void WriteRun(const Run& run, const std::filesystem::path& path, const std::string& tag) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  char buf[32];
  for (const auto& [qid, ranking] : run) {
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      // Shortest round-trip representation.
      auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), ranking[i].score);
      out << qid << " Q0 " << ranking[i].doc_id << ' ' << (i + 1) << ' '
          << std::string_view(buf, static_cast<std::size_t>(end - buf)) << ' ' << tag << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Run ReadRun(const std::filesystem::path& path) {
  auto in = OpenText(path);
  Run run;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    StripCr(line);
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    auto f = SplitWhitespace(line);
    if (f.size() != 6) throw FormatError(where + ": expected 6 columns");
    double score = 0.0;
    auto [ptr, ec] = std::from_chars(f[4].data(), f[4].data() + f[4].size(), score);
    if (ec != std::errc() || ptr != f[4].data() + f[4].size() || !std::isfinite(score)) {
      throw FormatError(where + ": bad score \"" + f[4] + "\"");
    }
    run[f[0]].push_back({f[2], score});
  }
  try {
    NormalizeRun(run);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return run;
}

MetricReport NdcgAtK(const Run& run, const Qrels& qrels, std::size_t k) {
  CheckK(k);
  return Evaluate("ndcg@" + std::to_string(k), run, qrels,
                  [k](const std::vector<RankedDoc>& ranking, const auto& judged) {
                    double dcg = 0.0;
                    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
                      const auto g = GradeOf(judged, ranking[i].doc_id);
                      if (g > 0) dcg += (std::exp2(static_cast<double>(g)) - 1.0) /
                                        std::log2(static_cast<double>(i) + 2.0);
                    }
                    std::vector<std::int64_t> grades;
                    for (const auto& [doc, g] : judged) {
                      if (g > 0) grades.push_back(g);
                    }
                    std::sort(grades.rbegin(), grades.rend());
                    double ideal = 0.0;
                    for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
                      ideal += (std::exp2(static_cast<double>(grades[i])) - 1.0) /
                               std::log2(static_cast<double>(i) + 2.0);
                    }
                    return dcg / ideal;
                  });
}

MetricReport RecallAtK(const Run& run, const Qrels& qrels, std::size_t k) {
  CheckK(k);
  return Evaluate("recall@" + std::to_string(k), run, qrels,
                  [k](const std::vector<RankedDoc>& ranking, const auto& judged) {
                    std::size_t relevant = 0;
                    for (const auto& [doc, g] : judged) relevant += g > 0 ? 1 : 0;
                    std::size_t found = 0;
                    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
                      found += GradeOf(judged, ranking[i].doc_id) > 0 ? 1 : 0;
                    }
                    return static_cast<double>(found) / static_cast<double>(relevant);
                  });
}

MetricReport MrrAtK(const Run& run, const Qrels& qrels, std::size_t k) {
  CheckK(k);
  return Evaluate("mrr@" + std::to_string(k), run, qrels,
                  [k](const std::vector<RankedDoc>& ranking, const auto& judged) {
                    for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
                      if (GradeOf(judged, ranking[i].doc_id) > 0) {
                        return 1.0 / static_cast<double>(i + 1);
                      }
                    }
                    return 0.0;
                  });
}

}  // namespace sparse_forge
