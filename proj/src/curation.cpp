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

#include "ebr/curation.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "ebr/error.hpp"
#include "ebr/random.hpp"
#include "ebr/text.hpp"

namespace ebr::curation {
namespace {

using corpus::Catalog;
using corpus::EngagementAggregate;
using corpus::ProductRecord;

std::string BrandOf(const ProductRecord& product, const std::vector<std::string>& title_words) {
  for (const char* name : {"brand", "spec:brand"}) {
    if (const std::string* brand = product.Field(name); brand && !brand->empty()) {
      return *brand;
    }
  }
  return title_words.empty() ? std::string() : title_words.front();
}

// Floyd's algorithm: `k` distinct values from [0, n) without materializing
// the range. Returned sorted.
std::vector<std::uint64_t> SampleIndices(std::uint64_t n, std::uint64_t k, Rng& rng) {
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = n - k; j < n; ++j) {
    std::uint64_t t = UniformIndex(rng, j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return {chosen.begin(), chosen.end()};
}

// Maps a linear index over the pairs (i, j), i < j < n, in row-major order.
std::pair<std::size_t, std::size_t> DecodePair(std::uint64_t index, std::size_t n) {
  std::size_t i = 0;
  while (index >= n - 1 - i) {
    index -= n - 1 - i;
    ++i;
  }
  return {i, i + 1 + static_cast<std::size_t>(index)};
}

}  // namespace

std::string_view PairKindName(PairKind kind) { return kind == PairKind::kQ2P ? "q2p" : "q2q"; }

std::string_view PairSourceName(PairSource source) {
  return source == PairSource::kEngagement ? "engagement" : "synthetic";
}

void CurationConfig::Validate() const {
  if (min_unique_visitors < 1) throw Error(ErrorCode::kInvalidConfig, "min_unique_visitors must be >= 1");
  if (per_category_cap < 1) throw Error(ErrorCode::kInvalidConfig, "per_category_cap must be >= 1");
  if (synthetic_queries_per_product < 1) {
    throw Error(ErrorCode::kInvalidConfig, "synthetic_queries_per_product must be >= 1");
  }
  if (q2q_max_pairs_per_product < 1) {
    throw Error(ErrorCode::kInvalidConfig, "q2q_max_pairs_per_product must be >= 1");
  }
}

std::vector<EngagementAggregate> FilterMinVisitors(const std::vector<EngagementAggregate>& aggregates,
                                                   std::uint64_t threshold) {
  if (threshold < 1) throw Error(ErrorCode::kInvalidConfig, "visitor threshold must be >= 1");
  std::vector<EngagementAggregate> out;
  std::copy_if(aggregates.begin(), aggregates.end(), std::back_inserter(out),
               [&](const EngagementAggregate& a) { return a.unique_visitors >= threshold; });
  return out;
}

std::vector<EngagementAggregate> StratifiedSample(const std::vector<EngagementAggregate>& aggregates,
                                                  const Catalog& catalog, std::uint64_t cap,
                                                  std::uint64_t seed) {
  if (cap < 1) throw Error(ErrorCode::kInvalidConfig, "per-category cap must be >= 1");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < aggregates.size(); ++i) {
    groups[corpus::TopCategory(catalog.At(aggregates[i].sku))].push_back(i);
  }
  std::vector<bool> keep(aggregates.size(), false);
  for (const auto& [category, members] : groups) {
    if (members.size() <= cap) {
      for (std::size_t i : members) keep[i] = true;
      continue;
    }
    Rng rng(SplitMix64(seed ^ Fnv1a64(category)));
    for (std::uint64_t pick : SampleIndices(members.size(), cap, rng)) keep[members[pick]] = true;
  }
  std::vector<EngagementAggregate> out;
  for (std::size_t i = 0; i < aggregates.size(); ++i) {
    if (keep[i]) out.push_back(aggregates[i]);
  }
  return out;
}

std::vector<std::string> TemplateGenerator::Candidates(const ProductRecord& product, std::size_t n,
                                                       std::uint64_t seed) const {
  const std::string title = NormalizeQuery(product.FieldOr("title"));
  const std::vector<std::string> words = SplitWords(title);
  const std::string brand = NormalizeQuery(BrandOf(product, words));
  const std::string leaf = NormalizeQuery(corpus::LeafCategory(product));

  std::vector<std::string> out;
  out.push_back(title);
  if (words.size() > 1 && words.front() == brand) {
    out.push_back(Join({words.begin() + 1, words.end()}, " "));
  }
  if (!leaf.empty()) {
    out.push_back(leaf);
    if (!brand.empty()) out.push_back(brand + " " + leaf);
  }
  for (const auto& [name, value] : product.fields) {
    if (name.rfind("spec:", 0) != 0 || name == "spec:brand") continue;
    std::string spec = NormalizeQuery(value);
    if (spec.empty()) continue;
    out.push_back(leaf.empty() ? spec + " " + title : spec + " " + leaf);
  }

  // Token-dropout variants. Distinctness is checked by the caller; the
  // attempt budget bounds the loop for degenerate titles.
  Rng rng(SplitMix64(seed ^ Fnv1a64(product.sku)));
  const std::size_t attempts = 20 * n + 20;
  for (std::size_t a = 0; a < attempts && words.size() > 1; ++a) {
    std::vector<std::string> kept;
    for (const auto& w : words) {
      if (UniformUnit(rng) < 0.6) kept.push_back(w);
    }
    if (kept.empty()) kept.push_back(words[UniformIndex(rng, words.size())]);
    if (!leaf.empty() && UniformUnit(rng) < 0.5) kept.push_back(leaf);
    out.push_back(Join(kept, " "));
  }
  return out;
}

std::vector<std::string> GenerateSyntheticQueries(const ProductRecord& product, std::size_t n,
                                                  const SyntheticGenerator& generator,
                                                  std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  if (NormalizeQuery(product.FieldOr("title")).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "product " + product.sku + " has no title");
  }
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& candidate : generator.Candidates(product, n, seed)) {
    std::string q = NormalizeQuery(candidate);
    if (q.empty() || !seen.insert(q).second) continue;
    out.push_back(std::move(q));
    if (out.size() == n) return out;
  }
  throw Error(ErrorCode::kDegenerate, "product " + product.sku + ": only " +
                                          std::to_string(out.size()) + " of " +
                                          std::to_string(n) + " distinct queries possible");
}

std::string RenderProduct(const ProductRecord& product) {
  if (const std::string* title = product.Field("title"); title && !title->empty()) return *title;
  for (const auto& [name, value] : product.fields) {
    if (!value.empty()) return value;
  }
  return product.sku;
}

std::vector<TrainingPair> ImportSyntheticQueries(const std::filesystem::path& path,
                                                 const Catalog& catalog) {
  std::vector<TrainingPair> pairs;
  ForEachJsonl(path, [&](std::size_t line, const Json& obj) {
    std::string sku = RequireString(obj, "sku", line);
    std::string query = NormalizeQuery(RequireString(obj, "query", line));
    const ProductRecord* product = catalog.Find(sku);
    if (product == nullptr) {
      throw Error(ErrorCode::kNotFound, path.string() + ":" + std::to_string(line) +
                                            ": unknown sku " + sku);
    }
    if (query.empty()) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line) +
                                         ": query is empty after normalization");
    }
    pairs.push_back({query, RenderProduct(*product), PairKind::kQ2P, PairSource::kSynthetic, sku});
  });
  return pairs;
}

std::vector<TrainingPair> BuildQ2pDataset(const std::vector<EngagementAggregate>& positives,
                                          const std::vector<TrainingPair>& synthetics,
                                          const Catalog& catalog) {
  std::vector<TrainingPair> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& agg : positives) {
    if (!seen.insert({agg.query, agg.sku}).second) continue;
    out.push_back({agg.query, RenderProduct(catalog.At(agg.sku)), PairKind::kQ2P,
                   PairSource::kEngagement, agg.sku});
  }
  for (const auto& pair : synthetics) {
    if (pair.kind != PairKind::kQ2P || !pair.right_sku) {
      throw Error(ErrorCode::kInvalidArgument, "synthetic pair is not a q2p pair");
    }
    catalog.At(*pair.right_sku);
    if (!seen.insert({pair.left, *pair.right_sku}).second) continue;
    out.push_back(pair);
  }
  return out;
}

std::vector<TrainingPair> BuildQ2qDataset(const std::vector<EngagementAggregate>& positives,
                                          std::uint64_t max_pairs_per_product, std::uint64_t seed,
                                          Q2qStats* stats) {
  if (max_pairs_per_product < 1) {
    throw Error(ErrorCode::kInvalidConfig, "q2q max pairs per product must be >= 1");
  }
  std::map<std::string, std::set<std::string>> queries_by_sku;
  for (const auto& agg : positives) {
    if (!agg.query.empty()) queries_by_sku[agg.sku].insert(agg.query);
  }
  std::vector<TrainingPair> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& [sku, query_set] : queries_by_sku) {
    const std::vector<std::string> queries(query_set.begin(), query_set.end());
    const std::uint64_t n = queries.size();
    const std::uint64_t total = n * (n - 1) / 2;
    std::vector<std::uint64_t> picks;
    if (total > max_pairs_per_product) {
      Rng rng(SplitMix64(seed ^ Fnv1a64(sku)));
      picks = SampleIndices(total, max_pairs_per_product, rng);
    } else {
      picks.resize(total);
      for (std::uint64_t i = 0; i < total; ++i) picks[i] = i;
    }
    if (stats != nullptr) {
      stats->distinct_queries[sku] = n;
      stats->sampled_pairs[sku] = picks.size();
    }
    for (std::uint64_t pick : picks) {
      auto [i, j] = DecodePair(pick, n);
      // `queries` is sorted, so (i < j) is already lexicographic order.
      if (!seen.insert({queries[i], queries[j]}).second) continue;
      out.push_back({queries[i], queries[j], PairKind::kQ2Q, PairSource::kEngagement, std::nullopt});
    }
  }
  return out;
}

std::vector<TrainingPair> LoadTrainingPairs(const std::filesystem::path& path) {
  std::vector<TrainingPair> pairs;
  ForEachJsonl(path, [&](std::size_t line, const Json& obj) {
    TrainingPair pair;
    pair.left = RequireString(obj, "left", line);
    pair.right = RequireString(obj, "right", line);
    std::string kind = RequireString(obj, "kind", line);
    std::string source = RequireString(obj, "source", line);
    if (kind != "q2p" && kind != "q2q") {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": bad kind " + kind);
    }
    if (source != "engagement" && source != "synthetic") {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": bad source " + source);
    }
    pair.kind = kind == "q2p" ? PairKind::kQ2P : PairKind::kQ2Q;
    pair.source = source == "engagement" ? PairSource::kEngagement : PairSource::kSynthetic;
    if (obj.contains("right_sku")) pair.right_sku = RequireString(obj, "right_sku", line);
    if (pair.left.empty() || pair.right.empty()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": empty side");
    }
    if (pair.kind == PairKind::kQ2P && !pair.right_sku) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": q2p pair without right_sku");
    }
    pairs.push_back(std::move(pair));
  });
  return pairs;
}

void SaveTrainingPairs(const std::filesystem::path& path, const std::vector<TrainingPair>& pairs) {
  std::vector<Json> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) {
    Json row{{"left", p.left},
             {"right", p.right},
             {"kind", PairKindName(p.kind)},
             {"source", PairSourceName(p.source)}};
    if (p.right_sku) row["right_sku"] = *p.right_sku;
    rows.push_back(std::move(row));
  }
  WriteJsonl(path, rows);
}

}  // namespace ebr::curation
