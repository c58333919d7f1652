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

#include "sparse_forge/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_set>

#include "binary_io.hpp"
#include "sparse_forge/error.hpp"

namespace sparse_forge {
namespace {

constexpr char kIndexMagic[4] = {'S', 'P', 'I', 'X'};
constexpr std::uint32_t kIndexVersion = 1;

// Relative slack on pruning decisions so that rounding in partial sums never
// discards a document that the exhaustive path would keep.
constexpr double kPruneSlack = 1e-9;

std::uint64_t Fnv1a(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool Better(const SearchHit& a, const SearchHit& b) {
  return a.score > b.score || (a.score == b.score && a.ordinal < b.ordinal);
}

struct Scored {
  DocOrdinal ordinal;
  double score;
};

// Worst kept hit at the front.
struct WorseFirst {
  bool operator()(const Scored& a, const Scored& b) const {
    return a.score > b.score || (a.score == b.score && a.ordinal < b.ordinal);
  }
};

}  // namespace

InvertedIndex InvertedIndex::Build(std::span<const NamedVector> docs, std::size_t vocab_size) {
  if (docs.size() > std::numeric_limits<DocOrdinal>::max()) {
    throw FormatError("index: too many documents");
  }
  InvertedIndex index;
  index.vocab_size_ = vocab_size;
  std::unordered_set<std::string> seen;
  std::map<TermId, PostingList> lists;
  for (std::size_t ord = 0; ord < docs.size(); ++ord) {
    const auto& doc = docs[ord];
    if (!seen.insert(doc.id).second) throw FormatError("index: duplicate document id \"" + doc.id + "\"");
    index.doc_ids_.push_back(doc.id);
    for (const auto& e : doc.vector.entries()) {
      if (e.term >= vocab_size) {
        throw FormatError("index: document \"" + doc.id + "\" has term " +
                          std::to_string(e.term) + " >= vocabulary size " +
                          std::to_string(vocab_size));
      }
      const auto impact = static_cast<float>(e.weight);
      if (!std::isfinite(impact)) {
        throw FormatError("index: weight of term " + std::to_string(e.term) +
                          " overflows a 32-bit float");
      }
      // Weights below the float range vanish on narrowing.
      if (impact == 0.0f) continue;
      auto& list = lists[e.term];
      list.docs.push_back(static_cast<DocOrdinal>(ord));
      list.impacts.push_back(impact);
      list.max_impact = std::max(list.max_impact, impact);
    }
  }
  for (auto& [term, list] : lists) {
    index.terms_.push_back(term);
    index.lists_.push_back(std::move(list));
  }
  return index;
}

const PostingList* InvertedIndex::postings(TermId term) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term);
  if (it == terms_.end() || *it != term) return nullptr;
  return &lists_[static_cast<std::size_t>(it - terms_.begin())];
}

SearchHit InvertedIndex::MakeHit(DocOrdinal ordinal, double score) const {
  return {ordinal, doc_ids_[ordinal], score};
}

SearchResult InvertedIndex::SearchExhaustive(const SparseVector& query, std::size_t k) const {
  if (k == 0) throw ContractError("search: k must be >= 1");
  std::vector<double> acc(doc_count(), 0.0);
  std::vector<DocOrdinal> touched;
  std::vector<bool> hit(doc_count(), false);
  for (const auto& q : query.entries()) {
    const PostingList* list = postings(q.term);
    if (list == nullptr) continue;
    for (std::size_t i = 0; i < list->docs.size(); ++i) {
      const DocOrdinal d = list->docs[i];
      acc[d] += q.weight * static_cast<double>(list->impacts[i]);
      if (!hit[d]) {
        hit[d] = true;
        touched.push_back(d);
      }
    }
  }
  SearchResult hits;
  hits.reserve(touched.size());
  for (DocOrdinal d : touched) hits.push_back(MakeHit(d, acc[d]));
  const std::size_t keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                    Better);
  hits.resize(keep);
  return hits;
}

SearchResult InvertedIndex::SearchMaxScore(const SparseVector& query, std::size_t k) const {
  if (k == 0) throw ContractError("search: k must be >= 1");

  struct Cursor {
    const PostingList* list;
    double weight;
    double upper_bound;
    std::size_t slot;  // position in ascending-term order, for canonical summation
    std::size_t pos = 0;

    DocOrdinal doc() const { return list->docs[pos]; }
    bool done() const { return pos >= list->docs.size(); }
    void SeekTo(DocOrdinal target) {
      auto begin = list->docs.begin() + static_cast<std::ptrdiff_t>(pos);
      pos = static_cast<std::size_t>(std::lower_bound(begin, list->docs.end(), target) -
                                     list->docs.begin());
    }
  };

  std::vector<Cursor> cursors;
  for (const auto& q : query.entries()) {
    const PostingList* list = postings(q.term);
    if (list == nullptr) continue;
    cursors.push_back({list, q.weight, q.weight * static_cast<double>(list->max_impact),
                       cursors.size()});
  }
  if (cursors.empty()) return {};
  const std::size_t m = cursors.size();

  std::stable_sort(cursors.begin(), cursors.end(), [](const Cursor& a, const Cursor& b) {
    return a.upper_bound < b.upper_bound;
  });
  // prefix_ub[i]: sum of bounds of the i lowest-bound cursors.
  std::vector<double> prefix_ub(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) prefix_ub[i + 1] = prefix_ub[i] + cursors[i].upper_bound;

  std::vector<Scored> heap;
  double threshold = -INFINITY;
  auto cannot_enter = [&](double bound) {
    return heap.size() == k && bound <= threshold - kPruneSlack * threshold;
  };
  // Cursors [0, first_essential) cannot lift a document into the top-k alone.
  std::size_t first_essential = 0;
  auto update_partition = [&] {
    while (first_essential < m && cannot_enter(prefix_ub[first_essential + 1])) ++first_essential;
  };

  std::vector<double> contribution(m, 0.0);
  std::vector<bool> matched(m, false);

  while (first_essential < m) {
    DocOrdinal doc = std::numeric_limits<DocOrdinal>::max();
    bool any = false;
    for (std::size_t i = first_essential; i < m; ++i) {
      if (!cursors[i].done() && (!any || cursors[i].doc() < doc)) {
        doc = cursors[i].doc();
        any = true;
      }
    }
    if (!any) break;

    double partial = 0.0;
    for (std::size_t i = first_essential; i < m; ++i) {
      auto& c = cursors[i];
      if (!c.done() && c.doc() == doc) {
        const double v = c.weight * static_cast<double>(c.list->impacts[c.pos]);
        contribution[c.slot] = v;
        matched[c.slot] = true;
        partial += v;
        ++c.pos;
      }
    }
    bool pruned = false;
    for (std::size_t i = first_essential; i-- > 0;) {
      if (cannot_enter(partial + prefix_ub[i + 1])) {
        pruned = true;
        break;
      }
      auto& c = cursors[i];
      c.SeekTo(doc);
      if (!c.done() && c.doc() == doc) {
        const double v = c.weight * static_cast<double>(c.list->impacts[c.pos]);
        contribution[c.slot] = v;
        matched[c.slot] = true;
        partial += v;
      }
    }

    if (!pruned) {
      // Same summation order as the exhaustive path.
      double score = 0.0;
      for (std::size_t s = 0; s < m; ++s) {
        if (matched[s]) score += contribution[s];
      }
      // Documents arrive in ascending ordinal order, so a tie never displaces.
      if (heap.size() < k) {
        heap.push_back({doc, score});
        std::push_heap(heap.begin(), heap.end(), WorseFirst{});
      } else if (score > heap.front().score) {
        std::pop_heap(heap.begin(), heap.end(), WorseFirst{});
        heap.back() = {doc, score};
        std::push_heap(heap.begin(), heap.end(), WorseFirst{});
      }
      if (heap.size() == k) {
        threshold = heap.front().score;
        update_partition();
      }
    }
    std::fill(matched.begin(), matched.end(), false);
  }

  SearchResult hits;
  hits.reserve(heap.size());
  for (const auto& s : heap) hits.push_back(MakeHit(s.ordinal, s.score));
  std::sort(hits.begin(), hits.end(), Better);
  return hits;
}

std::vector<std::uint8_t> InvertedIndex::Serialize() const {
  detail::ByteWriter out;
  out.PutBytes(kIndexMagic, sizeof(kIndexMagic));
  out.Put<std::uint32_t>(kIndexVersion);
  out.Put<std::uint64_t>(vocab_size_);
  out.Put<std::uint64_t>(doc_ids_.size());
  for (const auto& id : doc_ids_) {
    out.Put<std::uint32_t>(static_cast<std::uint32_t>(id.size()));
    out.PutBytes(id.data(), id.size());
  }
  out.Put<std::uint64_t>(terms_.size());
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& list = lists_[t];
    out.Put<std::uint32_t>(terms_[t]);
    out.Put<std::uint32_t>(static_cast<std::uint32_t>(list.docs.size()));
    DocOrdinal prev = 0;
    for (std::size_t i = 0; i < list.docs.size(); ++i) {
      out.PutVarint(i == 0 ? list.docs[i] : list.docs[i] - prev);
      prev = list.docs[i];
    }
    for (float f : list.impacts) out.Put<float>(f);
    out.Put<float>(list.max_impact);
  }
  out.Put<std::uint64_t>(Fnv1a(out.bytes()));
  return std::move(out.bytes());
}

InvertedIndex InvertedIndex::Deserialize(std::span<const std::uint8_t> bytes) {
  detail::ByteReader in(bytes, "index");
  auto magic = in.GetBytes(4);
  if (!std::equal(magic.begin(), magic.end(), kIndexMagic)) throw FormatError("index: bad magic");
  const auto version = in.Get<std::uint32_t>();
  if (version != kIndexVersion) {
    throw FormatError("index: unsupported version " + std::to_string(version));
  }
  if (bytes.size() < 8 + in.position()) throw FormatError("index: truncated");
  const auto body = bytes.first(bytes.size() - 8);
  detail::ByteReader footer(bytes.last(8), "index");
  if (Fnv1a(body) != footer.Get<std::uint64_t>()) throw FormatError("index: checksum mismatch");

  detail::ByteReader r(body, "index");
  r.GetBytes(8);
  InvertedIndex index;
  index.vocab_size_ = r.Get<std::uint64_t>();
  const auto doc_count = r.Get<std::uint64_t>();
  // Each id needs at least its 4-byte length prefix.
  if (doc_count > r.remaining() / 4 || doc_count > std::numeric_limits<DocOrdinal>::max()) {
    throw FormatError("index: document count exceeds file size");
  }
  std::unordered_set<std::string> seen;
  index.doc_ids_.reserve(doc_count);
  for (std::uint64_t i = 0; i < doc_count; ++i) {
    const auto len = r.Get<std::uint32_t>();
    auto raw = r.GetBytes(len);
    std::string id(raw.begin(), raw.end());
    if (!seen.insert(id).second) throw FormatError("index: duplicate document id \"" + id + "\"");
    index.doc_ids_.push_back(std::move(id));
  }
  const auto term_count = r.Get<std::uint64_t>();
  if (term_count > r.remaining() / 13) throw FormatError("index: term count exceeds file size");
  for (std::uint64_t t = 0; t < term_count; ++t) {
    const auto term = r.Get<std::uint32_t>();
    if (term >= index.vocab_size_ || (!index.terms_.empty() && term <= index.terms_.back())) {
      throw FormatError("index: bad term id " + std::to_string(term));
    }
    const auto len = r.Get<std::uint32_t>();
    if (len == 0 || len > doc_count) throw FormatError("index: bad posting list length");
    PostingList list;
    list.docs.reserve(len);
    std::uint64_t doc = 0;
    for (std::uint32_t i = 0; i < len; ++i) {
      const std::uint64_t gap = r.GetVarint();
      if (i > 0 && gap == 0) throw FormatError("index: posting list not strictly ascending");
      doc = (i == 0) ? gap : doc + gap;
      if (doc >= doc_count) throw FormatError("index: document ordinal out of range");
      list.docs.push_back(static_cast<DocOrdinal>(doc));
    }
    list.impacts.reserve(len);
    float max_seen = 0.0f;
    for (std::uint32_t i = 0; i < len; ++i) {
      const auto f = r.Get<float>();
      if (!(f > 0.0f) || !std::isfinite(f)) throw FormatError("index: impact must be positive");
      list.impacts.push_back(f);
      max_seen = std::max(max_seen, f);
    }
    list.max_impact = r.Get<float>();
    if (list.max_impact != max_seen) throw FormatError("index: max impact does not match list");
    index.terms_.push_back(term);
    index.lists_.push_back(std::move(list));
  }
  if (r.remaining() != 0) throw FormatError("index: trailing bytes");
  return index;
}

void InvertedIndex::Save(const std::filesystem::path& path) const {
  detail::WriteFileBytes(path.string(), Serialize());
}

InvertedIndex InvertedIndex::Load(const std::filesystem::path& path) {
  return Deserialize(detail::ReadFileBytes(path.string()));
}

}  // namespace sparse_forge
