// Copyright 2026 The EBR Authors.
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

#include "ebr/index.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_set>

#include "ebr/error.hpp"
#include "ebr/io.hpp"
#include "ebr/random.hpp"

namespace ebr::index {
namespace {

constexpr char kMagic[4] = {'E', 'B', 'R', 'I'};
constexpr std::uint32_t kVersion = 1;

double DotF(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

// Graph traversal only needs a consistent ordering, so it uses a float
// dot with independent partial sums that the compiler can vectorize.
// Reported scores always come from DotF.
float FastDot(const float* a, const float* b, std::size_t n) {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t k = 0; k < 8; ++k) acc[k] += a[i + k] * b[i + k];
  }
  float s = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

std::vector<SearchHit> TopK(std::vector<SearchHit> hits, std::size_t k) {
  k = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(), HitBefore);
  hits.resize(k);
  return hits;
}

}  // namespace

bool HitBefore(const SearchHit& a, const SearchHit& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.sku < b.sku;
}

void HnswParams::Validate() const {
  if (m < 2) throw Error(ErrorCode::kInvalidConfig, "hnsw m must be >= 2");
  if (ef_construction < m) throw Error(ErrorCode::kInvalidConfig, "ef_construction must be >= m");
  if (ef_search < 1) throw Error(ErrorCode::kInvalidConfig, "ef_search must be >= 1");
}

VectorIndex::VectorIndex(std::vector<IndexEntry> entries) {
  if (entries.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot index zero entries");
  dim_ = static_cast<std::uint32_t>(entries.front().vector.size());
  if (dim_ == 0) throw Error(ErrorCode::kInvalidArgument, "zero-dimensional vectors");
  std::unordered_set<std::string> seen;
  skus_.reserve(entries.size());
  vectors_.reserve(entries.size() * dim_);
  for (auto& e : entries) {
    if (!seen.insert(e.sku).second) throw Error(ErrorCode::kDuplicate, "duplicate sku " + e.sku);
    if (e.vector.size() != dim_) {
      throw Error(ErrorCode::kInvalidArgument, "sku " + e.sku + " has dimension " +
                                                   std::to_string(e.vector.size()));
    }
    const double norm = std::sqrt(DotF(e.vector, e.vector));
    if (std::abs(norm - 1.0) > 1e-6) {
      throw Error(ErrorCode::kInvalidArgument, "sku " + e.sku + " vector is not unit norm");
    }
    skus_.push_back(std::move(e.sku));
    vectors_.insert(vectors_.end(), e.vector.begin(), e.vector.end());
  }
}

double VectorIndex::Similarity(std::span<const float> query, std::size_t i) const {
  return DotF(query, vector(i));
}

std::vector<SearchHit> ExactIndex::Search(std::span<const float> query, std::size_t k) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (query.size() != dim_) throw Error(ErrorCode::kInvalidArgument, "query dimension mismatch");
  std::vector<SearchHit> hits;
  hits.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) hits.push_back({skus_[i], Similarity(query, i)});
  return TopK(std::move(hits), k);
}

HnswIndex::HnswIndex(std::vector<IndexEntry> entries, HnswParams params)
    : HnswIndex(std::move(entries), params, true) {}

HnswIndex::HnswIndex(std::vector<IndexEntry> entries, HnswParams params, bool build)
    : VectorIndex(std::move(entries)), params_(params) {
  params_.Validate();
  if (!build) return;
  const std::size_t n = size();
  levels_.resize(n);
  links_.resize(n);
  Rng rng(SplitMix64(params_.rng_seed));
  const double level_mult = 1.0 / std::log(static_cast<double>(params_.m));
  for (std::size_t i = 0; i < n; ++i) {
    double u = 1.0 - UniformUnit(rng);  // (0, 1]
    int level = static_cast<int>(std::floor(-std::log(u) * level_mult));
    level = std::min(level, 255);
    levels_[i] = static_cast<std::uint8_t>(level);
    links_[i].resize(static_cast<std::size_t>(level) + 1);
    Insert(static_cast<std::uint32_t>(i), level);
  }
}

std::unique_ptr<HnswIndex> HnswIndex::FromParts(
    std::vector<IndexEntry> entries, HnswParams params, std::uint32_t entry_point,
    std::vector<std::uint8_t> levels, std::vector<std::vector<std::vector<std::uint32_t>>> links) {
  std::unique_ptr<HnswIndex> index(new HnswIndex(std::move(entries), params, false));
  const std::size_t n = index->size();
  if (levels.size() != n || links.size() != n || entry_point >= n) {
    throw Error(ErrorCode::kFormat, "hnsw graph does not match the entry count");
  }
  int max_level = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (links[i].size() != static_cast<std::size_t>(levels[i]) + 1) {
      throw Error(ErrorCode::kFormat, "hnsw node level does not match its link lists");
    }
    for (const auto& level_links : links[i]) {
      for (auto id : level_links) {
        if (id >= n) throw Error(ErrorCode::kFormat, "hnsw neighbor id out of range");
      }
    }
    max_level = std::max<int>(max_level, levels[i]);
  }
  if (levels[entry_point] != max_level) {
    throw Error(ErrorCode::kFormat, "hnsw entry point is not on the top level");
  }
  index->entry_point_ = entry_point;
  index->max_level_ = max_level;
  index->levels_ = std::move(levels);
  index->links_ = std::move(links);
  return index;
}

std::vector<HnswIndex::Candidate> HnswIndex::SearchLayer(std::span<const float> query,
                                                         const std::vector<Candidate>& entry,
                                                         std::size_t ef, int level) const {
  // Total orders on (sim, id) keep traversal deterministic under ties.
  auto worse = [](const Candidate& a, const Candidate& b) {
    return a.sim != b.sim ? a.sim > b.sim : a.id < b.id;
  };
  auto better = [](const Candidate& a, const Candidate& b) {
    return a.sim != b.sim ? a.sim < b.sim : a.id > b.id;
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(better)> frontier(better);
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> found(worse);
  std::vector<bool> visited(size(), false);
  for (const auto& c : entry) {
    if (visited[c.id]) continue;
    visited[c.id] = true;
    frontier.push(c);
    found.push(c);
    if (found.size() > ef) found.pop();
  }
  while (!frontier.empty()) {
    Candidate current = frontier.top();
    frontier.pop();
    if (found.size() >= ef && current.sim < found.top().sim) break;
    for (std::uint32_t nb : links_[current.id][static_cast<std::size_t>(level)]) {
      if (visited[nb]) continue;
      visited[nb] = true;
      Candidate c{FastDot(query.data(), vector(nb).data(), dim_), nb};
      if (found.size() < ef || c.sim > found.top().sim) {
        frontier.push(c);
        found.push(c);
        if (found.size() > ef) found.pop();
      }
    }
  }
  std::vector<Candidate> out;
  out.reserve(found.size());
  while (!found.empty()) {
    out.push_back(found.top());
    found.pop();
  }
  std::reverse(out.begin(), out.end());  // best first
  return out;
}

std::vector<std::uint32_t> HnswIndex::SelectNeighbors(std::vector<Candidate> candidates,
                                                      std::size_t max_count) const {
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.sim != b.sim ? a.sim > b.sim : a.id < b.id;
  });
  // Keep a candidate only if it is closer to the base than to every
  // neighbor already kept, which spreads edges across directions.
  std::vector<std::uint32_t> selected;
  std::vector<std::uint32_t> pruned;
  for (const auto& c : candidates) {
    if (selected.size() >= max_count) break;
    bool keep = true;
    for (std::uint32_t s : selected) {
      if (FastDot(vector(c.id).data(), vector(s).data(), dim_) > c.sim) {
        keep = false;
        break;
      }
    }
    if (keep) {
      selected.push_back(c.id);
    } else {
      pruned.push_back(c.id);
    }
  }
  // Top up with the best pruned candidates so every node keeps its full
  // degree; on high-dimensional data the heuristic alone leaves the graph
  // too sparse.
  for (std::size_t i = 0; i < pruned.size() && selected.size() < max_count; ++i) {
    selected.push_back(pruned[i]);
  }
  return selected;
}

void HnswIndex::Insert(std::uint32_t node, int level) {
  if (node == 0) {
    entry_point_ = 0;
    max_level_ = level;
    return;
  }
  const std::span<const float> q = vector(node);
  std::vector<Candidate> ep = {{FastDot(q.data(), vector(entry_point_).data(), dim_), entry_point_}};
  for (int l = max_level_; l > level; --l) ep = {SearchLayer(q, ep, 1, l).front()};
  for (int l = std::min(level, max_level_); l >= 0; --l) {
    std::vector<Candidate> found = SearchLayer(q, ep, params_.ef_construction, l);
    const auto lvl = static_cast<std::size_t>(l);
    links_[node][lvl] = SelectNeighbors(found, MaxDegree(l));
    for (std::uint32_t nb : links_[node][lvl]) {
      auto& nb_links = links_[nb][lvl];
      nb_links.push_back(node);
      if (nb_links.size() > MaxDegree(l)) {
        std::vector<Candidate> cands;
        cands.reserve(nb_links.size());
        for (std::uint32_t x : nb_links) {
          cands.push_back({FastDot(vector(nb).data(), vector(x).data(), dim_), x});
        }
        nb_links = SelectNeighbors(std::move(cands), MaxDegree(l));
      }
    }
    ep = std::move(found);
  }
  if (level > max_level_) {
    max_level_ = level;
    entry_point_ = node;
  }
}

std::vector<SearchHit> HnswIndex::Search(std::span<const float> query, std::size_t k) const {
  return SearchWithEf(query, k, params_.ef_search);
}

std::vector<SearchHit> HnswIndex::SearchWithEf(std::span<const float> query, std::size_t k,
                                               std::size_t ef) const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (query.size() != dim_) throw Error(ErrorCode::kInvalidArgument, "query dimension mismatch");
  std::vector<Candidate> ep = {{FastDot(query.data(), vector(entry_point_).data(), dim_), entry_point_}};
  for (int l = max_level_; l > 0; --l) ep = {SearchLayer(query, ep, 1, l).front()};
  std::vector<Candidate> found = SearchLayer(query, ep, std::max(ef, k), 0);
  std::vector<SearchHit> hits;
  hits.reserve(found.size());
  for (const auto& c : found) hits.push_back({skus_[c.id], Similarity(query, c.id)});
  return TopK(std::move(hits), k);
}

std::unique_ptr<ExactIndex> BuildExact(std::vector<IndexEntry> entries) {
  return std::make_unique<ExactIndex>(std::move(entries));
}

std::unique_ptr<HnswIndex> BuildHnsw(std::vector<IndexEntry> entries, const HnswParams& params) {
  return std::make_unique<HnswIndex>(std::move(entries), params);
}

std::string SerializeIndex(const VectorIndex& index) {
  BinaryWriter w;
  w.Bytes(std::string_view(kMagic, 4));
  w.U32(kVersion);
  w.U32(index.dim());
  w.U32(static_cast<std::uint32_t>(index.size()));
  for (std::size_t i = 0; i < index.size(); ++i) {
    w.U16(static_cast<std::uint16_t>(index.sku(i).size()));
    w.Bytes(index.sku(i));
    for (float x : index.vector(i)) w.F32(x);
  }
  const auto* hnsw = dynamic_cast<const HnswIndex*>(&index);
  w.U8(hnsw != nullptr ? 1 : 0);
  if (hnsw == nullptr) return w.data();
  const HnswParams& p = hnsw->params();
  w.U32(p.m);
  w.U32(p.ef_construction);
  w.U32(p.ef_search);
  w.U64(p.rng_seed);
  w.U32(hnsw->entry_point());
  w.U32(static_cast<std::uint32_t>(hnsw->level_count()));
  for (std::size_t i = 0; i < index.size(); ++i) w.U8(hnsw->node_level(i));
  for (std::size_t level = 0; level < hnsw->level_count(); ++level) {
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (hnsw->node_level(i) < level) continue;
      const auto& nbs = hnsw->neighbors(i, level);
      w.U32(static_cast<std::uint32_t>(nbs.size()));
      for (auto id : nbs) w.U32(id);
    }
  }
  return w.data();
}

std::unique_ptr<VectorIndex> ParseIndex(std::string_view bytes) {
  BinaryReader r(bytes);
  if (r.Bytes(4) != std::string_view(kMagic, 4)) throw Error(ErrorCode::kFormat, "not an index file");
  const std::uint32_t version = r.U32();
  if (version != kVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "unsupported index version " + std::to_string(version));
  }
  const std::uint32_t dim = r.U32();
  const std::uint32_t count = r.U32();
  std::vector<IndexEntry> entries;
  entries.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    IndexEntry e;
    e.sku = std::string(r.Bytes(r.U16()));
    e.vector.resize(dim);
    for (float& x : e.vector) x = r.F32();
    entries.push_back(std::move(e));
  }
  const std::uint8_t has_graph = r.U8();
  if (has_graph == 0) {
    if (!r.AtEnd()) throw Error(ErrorCode::kFormat, "trailing bytes after index");
    return BuildExact(std::move(entries));
  }
  HnswParams p;
  p.m = r.U32();
  p.ef_construction = r.U32();
  p.ef_search = r.U32();
  p.rng_seed = r.U64();
  const std::uint32_t entry_point = r.U32();
  const std::uint32_t level_count = r.U32();
  std::vector<std::uint8_t> levels(count);
  for (auto& l : levels) {
    l = r.U8();
    if (l >= level_count) throw Error(ErrorCode::kFormat, "node level exceeds level count");
  }
  std::vector<std::vector<std::vector<std::uint32_t>>> links(count);
  for (std::uint32_t i = 0; i < count; ++i) links[i].resize(static_cast<std::size_t>(levels[i]) + 1);
  for (std::uint32_t level = 0; level < level_count; ++level) {
    for (std::uint32_t i = 0; i < count; ++i) {
      if (levels[i] < level) continue;
      const std::uint32_t n = r.U32();
      if (r.remaining() / 4 < n) throw Error(ErrorCode::kFormat, "index truncated in graph");
      auto& nbs = links[i][level];
      nbs.resize(n);
      for (auto& id : nbs) id = r.U32();
    }
  }
  if (!r.AtEnd()) throw Error(ErrorCode::kFormat, "trailing bytes after index");
  return HnswIndex::FromParts(std::move(entries), p, entry_point, std::move(levels), std::move(links));
}

void SaveIndex(const VectorIndex& index, const std::filesystem::path& path) {
  WriteFile(path, SerializeIndex(index));
}

std::unique_ptr<VectorIndex> LoadIndex(const std::filesystem::path& path) {
  return ParseIndex(ReadFile(path));
}

std::vector<IndexEntry> LoadEmbeddings(const std::filesystem::path& path) {
  std::vector<IndexEntry> entries;
  ForEachJsonl(path, [&](std::size_t line, const Json& obj) {
    IndexEntry e;
    e.sku = RequireString(obj, "sku", line);
    auto it = obj.find("vector");
    if (it == obj.end() || !it->is_array()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": missing vector");
    }
    e.vector = it->get<std::vector<float>>();
    entries.push_back(std::move(e));
  });
  return entries;
}

void SaveEmbeddings(const std::filesystem::path& path, const std::vector<IndexEntry>& entries) {
  std::vector<Json> rows;
  rows.reserve(entries.size());
  for (const auto& e : entries) rows.push_back(Json{{"sku", e.sku}, {"vector", e.vector}});
  WriteJsonl(path, rows);
}

}  // namespace ebr::index
