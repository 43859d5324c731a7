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

#include "ebr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "ebr/error.hpp"
#include "ebr/random.hpp"
#include "ebr/text.hpp"

namespace ebr::pipeline {

using curation::TrainingPair;

std::vector<bool> HoldoutMask(const std::vector<TrainingPair>& pairs, double fraction,
                              std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "holdout fraction must be in [0, 1)");
  }
  const auto count = static_cast<std::size_t>(std::llround(fraction * pairs.size()));
  std::vector<std::pair<double, std::size_t>> keys;
  keys.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    keys.emplace_back(KeyedUniform(seed, pairs[i].left + '\x1f' + pairs[i].right_sku.value_or("")),
                      i);
  }
  std::sort(keys.begin(), keys.end());
  std::vector<bool> mask(pairs.size(), false);
  for (std::size_t i = 0; i < count; ++i) mask[keys[i].second] = true;
  return mask;
}

std::vector<TrainingPair> SynthesizeAll(const corpus::Catalog& catalog, std::size_t n,
                                        const curation::SyntheticGenerator& generator,
                                        std::uint64_t seed) {
  std::vector<TrainingPair> synthetics;
  for (const auto& product : catalog.products()) {
    const std::string rendered = curation::RenderProduct(product);
    for (auto& query : curation::GenerateSyntheticQueries(product, n, generator, seed)) {
      synthetics.push_back({std::move(query), rendered, curation::PairKind::kQ2P,
                            curation::PairSource::kSynthetic, product.sku});
    }
  }
  return synthetics;
}

CuratedData Curate(const corpus::Catalog& catalog,
                   const std::vector<corpus::EngagementAggregate>& aggregates,
                   std::vector<TrainingPair> synthetics, const curation::CurationConfig& config,
                   double holdout_fraction) {
  config.Validate();
  CuratedData out;
  auto filtered = curation::FilterMinVisitors(aggregates, config.min_unique_visitors);
  auto positives =
      curation::StratifiedSample(filtered, catalog, config.per_category_cap, config.rng_seed);

  const auto mask = HoldoutMask(synthetics, holdout_fraction, config.rng_seed ^ 0x401d0u);
  std::set<std::pair<std::string, std::string>> held_pairs;
  std::set<std::string> held_queries;
  std::vector<TrainingPair> kept;
  for (std::size_t i = 0; i < synthetics.size(); ++i) {
    if (mask[i]) {
      held_pairs.emplace(synthetics[i].left, *synthetics[i].right_sku);
      held_queries.insert(synthetics[i].left);
      out.holdout.push_back(synthetics[i]);
    } else {
      kept.push_back(std::move(synthetics[i]));
    }
  }
  std::erase_if(positives, [&](const corpus::EngagementAggregate& a) {
    return held_pairs.contains({a.query, a.sku});
  });

  out.q2p = curation::BuildQ2pDataset(positives, kept, catalog);
  out.q2q = curation::BuildQ2qDataset(positives, config.q2q_max_pairs_per_product,
                                      config.rng_seed, &out.q2q_stats);
  std::erase_if(out.q2q, [&](const TrainingPair& p) {
    return held_queries.contains(p.left) || held_queries.contains(p.right);
  });
  out.positives = std::move(positives);
  return out;
}

std::vector<std::string> PretrainTexts(const corpus::Catalog& catalog,
                                       const std::vector<TrainingPair>& pairs) {
  std::vector<std::string> texts;
  for (const auto& product : catalog.products()) {
    for (const auto& [name, value] : product.fields) {
      std::string text = NormalizeQuery(value);
      if (!text.empty()) texts.push_back(std::move(text));
    }
  }
  std::set<std::string> seen;
  for (const auto& pair : pairs) {
    if (seen.insert(pair.left).second) texts.push_back(pair.left);
  }
  return texts;
}

ModelSet TrainAll(const CuratedData& data, const corpus::Catalog& catalog, const TrainPlan& plan) {
  ModelSet models;
  models.base = encoder::InitCheckpoint(plan.encoder, plan.init_seed, "base");
  if (plan.pretrain) {
    models.base = training::PretrainEmbeddings(PretrainTexts(catalog, data.q2p), models.base,
                                               plan.pretrain_config);
    models.base.model_id = "base";
  }
  training::TrainingConfig q2q = plan.q2q;
  q2q.stage = training::Stage::kQ2Q;
  training::TrainingConfig q2p = plan.q2p;
  q2p.stage = training::Stage::kQ2P;

  auto q2q_result = training::TrainStage(data.q2q, models.base, q2q, nullptr);
  models.q2q = std::move(q2q_result.checkpoint);
  models.q2q_log = std::move(q2q_result.log);

  auto q2p_result = training::TrainStage(data.q2p, models.base, q2p, &catalog);
  models.q2p = std::move(q2p_result.checkpoint);
  models.q2p_log = std::move(q2p_result.log);

  auto staged = training::TrainStage(data.q2p, models.q2q, q2p, &catalog);
  models.q2q_q2p = std::move(staged.checkpoint);
  models.q2q_q2p_log = std::move(staged.log);

  const std::array<training::MergeComponent, 3> parts = {{
      {&models.q2q, plan.merge_weights[0]},
      {&models.q2p, plan.merge_weights[1]},
      {&models.q2q_q2p, plan.merge_weights[2]},
  }};
  models.merged = training::MergeCheckpoints(parts);
  return models;
}

std::vector<index::IndexEntry> EmbedCatalog(const encoder::Encoder& model,
                                            const corpus::Catalog& catalog) {
  std::vector<index::IndexEntry> entries;
  entries.reserve(catalog.products().size());
  for (const auto& product : catalog.products()) {
    entries.push_back({product.sku, encoder::ToFloat(model.EmbedProduct(product))});
  }
  return entries;
}

eval::RetrievalRun RetrieveAll(const encoder::Encoder& model, const index::VectorIndex& index,
                               const std::vector<std::string>& queries, std::size_t k,
                               const std::string& source_id) {
  eval::RetrievalRun run;
  run.source_id = source_id;
  for (const auto& query : queries) {
    const auto vec = encoder::ToFloat(model.EmbedText(NormalizeQuery(query)));
    auto& ranked = run.results[query];
    for (const auto& hit : index.Search(vec, k)) ranked.push_back(hit.sku);
  }
  return run;
}

std::vector<eval::JudgedPair> HoldoutJudgments(const std::vector<TrainingPair>& holdout) {
  std::vector<eval::JudgedPair> judgments;
  judgments.reserve(holdout.size());
  for (const auto& pair : holdout) {
    judgments.push_back({pair.left, pair.right_sku.value_or(""), eval::Grade::kExcellent,
                         "holdout", 0});
  }
  return judgments;
}

double RandomRecall(std::size_t k, std::size_t catalog_size) {
  if (catalog_size == 0) throw Error(ErrorCode::kInvalidArgument, "empty catalog");
  return std::min(1.0, static_cast<double>(k) / static_cast<double>(catalog_size));
}

HoldoutScore ScoreHoldout(const encoder::EncoderCheckpoint& checkpoint,
                          const corpus::Catalog& catalog,
                          const std::vector<TrainingPair>& holdout, std::size_t k,
                          const index::HnswParams& params) {
  const encoder::Encoder model(checkpoint);
  const auto index = index::BuildHnsw(EmbedCatalog(model, catalog), params);
  const auto judgments = HoldoutJudgments(holdout);
  std::vector<std::string> queries;
  for (const auto& [query, skus] : eval::RelevantSets(judgments, eval::Grade::kGood)) {
    queries.push_back(query);
  }
  const auto run = RetrieveAll(model, *index, queries, k, checkpoint.model_id);
  const auto report = eval::RecallAtK(run, judgments, k, eval::Grade::kGood);
  return {checkpoint.model_id, report.macro, report.per_query.size()};
}

}  // namespace ebr::pipeline
