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

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ebr/corpus.hpp"
#include "ebr/curation.hpp"
#include "ebr/encoder.hpp"
#include "ebr/evaluation.hpp"
#include "ebr/index.hpp"
#include "ebr/training.hpp"

// Glue that chains the per-module operations into the offline pipeline.
namespace ebr::pipeline {

struct CuratedData {
  std::vector<corpus::EngagementAggregate> positives;  // filtered and stratified
  std::vector<curation::TrainingPair> q2p;
  std::vector<curation::TrainingPair> q2q;
  std::vector<curation::TrainingPair> holdout;  // synthetic q2p pairs kept out of training
  curation::Q2qStats q2q_stats;
};

// n synthetic q2p pairs per catalog product.
std::vector<curation::TrainingPair> SynthesizeAll(const corpus::Catalog& catalog, std::size_t n,
                                                  const curation::SyntheticGenerator& generator,
                                                  std::uint64_t seed);

// filter -> stratify -> hold out -> assemble. Held-out (query, sku) pairs
// are also removed from the engagement side, and q2q pairs touching a
// held-out query are dropped.
CuratedData Curate(const corpus::Catalog& catalog,
                   const std::vector<corpus::EngagementAggregate>& aggregates,
                   std::vector<curation::TrainingPair> synthetics,
                   const curation::CurationConfig& config, double holdout_fraction);

// Exactly round(fraction * n) pairs, chosen by seeded per-pair keys.
std::vector<bool> HoldoutMask(const std::vector<curation::TrainingPair>& pairs, double fraction,
                              std::uint64_t seed);

// Catalog texts and query strings used for token-embedding pretraining.
std::vector<std::string> PretrainTexts(const corpus::Catalog& catalog,
                                       const std::vector<curation::TrainingPair>& pairs);

struct TrainPlan {
  encoder::EncoderConfig encoder;
  std::uint64_t init_seed = 0;
  bool pretrain = false;
  training::PretrainConfig pretrain_config;
  training::TrainingConfig q2q;
  training::TrainingConfig q2p;
  std::array<double, 3> merge_weights = {0.2, 0.4, 0.4};  // q2q, q2p, q2q_q2p
};

struct ModelSet {
  encoder::EncoderCheckpoint base;
  encoder::EncoderCheckpoint q2q;
  encoder::EncoderCheckpoint q2p;
  encoder::EncoderCheckpoint q2q_q2p;
  encoder::EncoderCheckpoint merged;
  std::vector<training::EpochLog> q2q_log;
  std::vector<training::EpochLog> q2p_log;
  std::vector<training::EpochLog> q2q_q2p_log;  // the q2p stage run on top of q2q
};

ModelSet TrainAll(const CuratedData& data, const corpus::Catalog& catalog, const TrainPlan& plan);

std::vector<index::IndexEntry> EmbedCatalog(const encoder::Encoder& model,
                                            const corpus::Catalog& catalog);

eval::RetrievalRun RetrieveAll(const encoder::Encoder& model, const index::VectorIndex& index,
                               const std::vector<std::string>& queries, std::size_t k,
                               const std::string& source_id);

// Each held-out pair becomes an Excellent judgment, so held-out recall is
// ordinary recall@K over those judgments.
std::vector<eval::JudgedPair> HoldoutJudgments(const std::vector<curation::TrainingPair>& holdout);

// Expected recall@K of a uniformly random ranking over n products.
double RandomRecall(std::size_t k, std::size_t catalog_size);

struct HoldoutScore {
  std::string model_id;
  double recall = 0.0;
  std::size_t queries = 0;
};

HoldoutScore ScoreHoldout(const encoder::EncoderCheckpoint& checkpoint,
                          const corpus::Catalog& catalog,
                          const std::vector<curation::TrainingPair>& holdout, std::size_t k,
                          const index::HnswParams& params);

}  // namespace ebr::pipeline
