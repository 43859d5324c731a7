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

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ebr::index {

struct IndexEntry {
  std::string sku;
  std::vector<float> vector;  // unit norm
};

struct SearchHit {
  std::string sku;
  double score = 0.0;  // cosine similarity

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

// Result order: score descending, then sku ascending by bytes.
bool HitBefore(const SearchHit& a, const SearchHit& b);

struct HnswParams {
  std::uint32_t m = 16;
  std::uint32_t ef_construction = 200;
  std::uint32_t ef_search = 100;
  std::uint64_t rng_seed = 0;

  void Validate() const;
};

// Immutable after construction; Search is safe for concurrent callers.
class VectorIndex {
 public:
  virtual ~VectorIndex() = default;

  // At most min(k, size()) hits ordered by HitBefore. Throws
  // kInvalidArgument for k < 1 or a query of the wrong dimension.
  virtual std::vector<SearchHit> Search(std::span<const float> query, std::size_t k) const = 0;

  std::size_t size() const { return skus_.size(); }
  std::uint32_t dim() const { return dim_; }
  const std::string& sku(std::size_t i) const { return skus_[i]; }
  std::span<const float> vector(std::size_t i) const {
    return {vectors_.data() + i * dim_, dim_};
  }

 protected:
  explicit VectorIndex(std::vector<IndexEntry> entries);
  double Similarity(std::span<const float> query, std::size_t i) const;

  std::uint32_t dim_ = 0;
  std::vector<std::string> skus_;
  std::vector<float> vectors_;
};

class ExactIndex final : public VectorIndex {
 public:
  explicit ExactIndex(std::vector<IndexEntry> entries) : VectorIndex(std::move(entries)) {}

  std::vector<SearchHit> Search(std::span<const float> query, std::size_t k) const override;
};

// Hierarchical navigable small world graph over cosine similarity.
// Level draws are seeded so a build is deterministic for fixed input.
class HnswIndex final : public VectorIndex {
 public:
  HnswIndex(std::vector<IndexEntry> entries, HnswParams params);

  std::vector<SearchHit> Search(std::span<const float> query, std::size_t k) const override;
  // Same as Search with an explicit beam width.
  std::vector<SearchHit> SearchWithEf(std::span<const float> query, std::size_t k,
                                      std::size_t ef) const;

  const HnswParams& params() const { return params_; }
  std::uint32_t entry_point() const { return entry_point_; }
  std::size_t level_count() const { return static_cast<std::size_t>(max_level_) + 1; }
  std::uint8_t node_level(std::size_t node) const { return levels_[node]; }
  const std::vector<std::uint32_t>& neighbors(std::size_t node, std::size_t level) const {
    return links_[node][level];
  }

  // Rehydrates a persisted graph.
  static std::unique_ptr<HnswIndex> FromParts(std::vector<IndexEntry> entries, HnswParams params,
                                              std::uint32_t entry_point,
                                              std::vector<std::uint8_t> levels,
                                              std::vector<std::vector<std::vector<std::uint32_t>>> links);

 private:
  struct Candidate {
    double sim;
    std::uint32_t id;
  };

  HnswIndex(std::vector<IndexEntry> entries, HnswParams params, bool build);

  void Insert(std::uint32_t node, int level);
  std::vector<Candidate> SearchLayer(std::span<const float> query,
                                     const std::vector<Candidate>& entry, std::size_t ef,
                                     int level) const;
  std::vector<std::uint32_t> SelectNeighbors(std::vector<Candidate> candidates,
                                             std::size_t max_count) const;
  std::size_t MaxDegree(int level) const { return level == 0 ? 2 * params_.m : params_.m; }

  HnswParams params_;
  std::uint32_t entry_point_ = 0;
  int max_level_ = 0;
  std::vector<std::uint8_t> levels_;
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;  // [node][level]
};

std::unique_ptr<ExactIndex> BuildExact(std::vector<IndexEntry> entries);
std::unique_ptr<HnswIndex> BuildHnsw(std::vector<IndexEntry> entries, const HnswParams& params);

// Layout (little-endian): "EBRI", u32 version (1), u32 dim, u32 count,
// per entry u16 sku length + bytes + dim binary32 values, then u8 graph
// flag. With a graph: u32 m, u32 ef_construction, u32 ef_search,
// u64 seed, u32 entry point, u32 level count, per node u8 level, and per
// level (0 upward) for every node present on it a u32 neighbor count
// followed by u32 neighbor ids.
std::string SerializeIndex(const VectorIndex& index);
std::unique_ptr<VectorIndex> ParseIndex(std::string_view bytes);
void SaveIndex(const VectorIndex& index, const std::filesystem::path& path);
std::unique_ptr<VectorIndex> LoadIndex(const std::filesystem::path& path);

// Embeddings JSONL rows {"sku": "...", "vector": [...]}.
std::vector<IndexEntry> LoadEmbeddings(const std::filesystem::path& path);
void SaveEmbeddings(const std::filesystem::path& path, const std::vector<IndexEntry>& entries);

}  // namespace ebr::index
