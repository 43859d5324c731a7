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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ebr/corpus.hpp"

namespace ebr::curation {

enum class PairKind : std::uint8_t { kQ2P, kQ2Q };
enum class PairSource : std::uint8_t { kEngagement, kSynthetic };

std::string_view PairKindName(PairKind kind);
std::string_view PairSourceName(PairSource source);

struct TrainingPair {
  std::string left;   // always a normalized query
  std::string right;  // product rendering (q2p) or a query (q2q)
  PairKind kind = PairKind::kQ2P;
  PairSource source = PairSource::kEngagement;
  std::optional<std::string> right_sku;  // set for q2p

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

struct CurationConfig {
  std::uint64_t min_unique_visitors = 2;
  std::uint64_t per_category_cap = 1000;
  std::uint64_t synthetic_queries_per_product = 10;
  std::uint64_t q2q_max_pairs_per_product = 400;
  std::uint64_t rng_seed = 0;

  void Validate() const;
};

// Stage 1: keeps aggregates with unique_visitors >= threshold, in order.
std::vector<corpus::EngagementAggregate> FilterMinVisitors(
    const std::vector<corpus::EngagementAggregate>& aggregates, std::uint64_t threshold);

// Stage 2: groups by the product's top-level category and keeps
// min(cap, group size) uniformly sampled pairs per group. Survivors keep
// their input order.
std::vector<corpus::EngagementAggregate> StratifiedSample(
    const std::vector<corpus::EngagementAggregate>& aggregates, const corpus::Catalog& catalog,
    std::uint64_t cap, std::uint64_t seed);

// Source of candidate synthetic queries for a product. Implementations may
// return fewer than `n` or repeated candidates; GenerateSyntheticQueries
// normalizes and deduplicates.
class SyntheticGenerator {
 public:
  virtual ~SyntheticGenerator() = default;
  virtual std::vector<std::string> Candidates(const corpus::ProductRecord& product,
                                              std::size_t n, std::uint64_t seed) const = 0;
};

// Deterministic template generator: full title, title without the brand
// token, leaf category, "<brand> <leaf>", "<spec value> <leaf>" for each
// spec, then seeded token-dropout variants of the title.
class TemplateGenerator final : public SyntheticGenerator {
 public:
  std::vector<std::string> Candidates(const corpus::ProductRecord& product, std::size_t n,
                                      std::uint64_t seed) const override;
};

// Exactly `n` distinct normalized queries, or ErrorCode::kDegenerate
// reporting how many were possible.
std::vector<std::string> GenerateSyntheticQueries(const corpus::ProductRecord& product,
                                                  std::size_t n,
                                                  const SyntheticGenerator& generator,
                                                  std::uint64_t seed);

// Text used as the right side of a q2p pair (the product title when set).
std::string RenderProduct(const corpus::ProductRecord& product);

// Reads {"sku", "query"} rows produced by an external generator.
std::vector<TrainingPair> ImportSyntheticQueries(const std::filesystem::path& path,
                                                 const corpus::Catalog& catalog);

// Engagement positives followed by synthetic pairs; a duplicate
// (query, sku) keeps the first occurrence, so engagement wins.
std::vector<TrainingPair> BuildQ2pDataset(
    const std::vector<corpus::EngagementAggregate>& positives,
    const std::vector<TrainingPair>& synthetics, const corpus::Catalog& catalog);

// Per-product bookkeeping from BuildQ2qDataset, before global dedup.
struct Q2qStats {
  std::map<std::string, std::size_t> distinct_queries;
  std::map<std::string, std::size_t> sampled_pairs;
};

// Co-conversion query pairs: all unordered pairs of distinct queries that
// converted on the same product, capped per product by seeded uniform
// sampling, canonically ordered and deduplicated across products.
std::vector<TrainingPair> BuildQ2qDataset(
    const std::vector<corpus::EngagementAggregate>& positives,
    std::uint64_t max_pairs_per_product, std::uint64_t seed, Q2qStats* stats = nullptr);

std::vector<TrainingPair> LoadTrainingPairs(const std::filesystem::path& path);
void SaveTrainingPairs(const std::filesystem::path& path, const std::vector<TrainingPair>& pairs);

}  // namespace ebr::curation
