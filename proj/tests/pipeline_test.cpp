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


#include <cmath>
#include <set>

#include "doctest.h"
#include "ebr/pipeline.hpp"
#include "ebr/synthetic.hpp"
#include "ebr/text.hpp"

namespace ebr::pipeline {
namespace {

struct Small {
  synthetic::SyntheticCorpus corpus;
  CuratedData data;
  curation::CurationConfig config;

  Small() {
    synthetic::CorpusSpec spec;
    spec.products = 150;
    spec.sessions = 3000;
    spec.visitors = 400;
    spec.seed = 5;
    corpus = synthetic::GenerateCorpus(spec);
    config.rng_seed = 5;
    config.synthetic_queries_per_product = 4;
    config.q2q_max_pairs_per_product = 50;
    curation::TemplateGenerator generator;
    data = Curate(corpus.catalog, corpus::AggregateEvents(corpus.events),
                  SynthesizeAll(corpus.catalog, 4, generator, 5), config, 0.2);
  }
};

TrainPlan SmallPlan() {
  TrainPlan plan;
  plan.encoder.vocab_buckets = 4096;
  plan.encoder.embedding_dim = 16;
  plan.init_seed = 5;
  for (auto* c : {&plan.q2q, &plan.q2p}) {
    c->optimizer = training::Optimizer::kAdam;
    c->learning_rate = 0.01;
    c->epochs = 2;
    c->rng_seed = 5;
  }
  plan.q2q.stage = training::Stage::kQ2Q;
  plan.q2p.stage = training::Stage::kQ2P;
  return plan;
}

TEST_SUITE("pipeline") {

TEST_CASE("holdout mask picks exactly round(f * n) pairs, deterministically") {
  std::vector<curation::TrainingPair> pairs;
  for (int i = 0; i < 37; ++i) {
    pairs.push_back({"q" + std::to_string(i), "p", curation::PairKind::kQ2P,
                     curation::PairSource::kSynthetic, "s" + std::to_string(i)});
  }
  for (double f : {0.0, 0.1, 0.25, 0.5}) {
    const auto mask = HoldoutMask(pairs, f, 9);
    CHECK(static_cast<double>(std::count(mask.begin(), mask.end(), true)) == std::round(f * 37));
    CHECK(mask == HoldoutMask(pairs, f, 9));
  }
}

TEST_CASE("held-out pairs never reach training") {
  const Small s;
  REQUIRE_FALSE(s.data.holdout.empty());
  std::set<std::pair<std::string, std::string>> held;
  std::set<std::string> held_queries;
  for (const auto& p : s.data.holdout) {
    held.insert({p.left, *p.right_sku});
    held_queries.insert(p.left);
  }
  for (const auto& p : s.data.q2p) {
    REQUIRE(p.right_sku.has_value());
    CHECK_FALSE(held.contains({p.left, *p.right_sku}));
  }
  for (const auto& p : s.data.q2q) {
    CHECK_FALSE(held_queries.contains(p.left));
    CHECK_FALSE(held_queries.contains(p.right));
  }
  for (const auto& a : s.data.positives) {
    CHECK(a.unique_visitors >= s.config.min_unique_visitors);
    CHECK_FALSE(held.contains({a.query, a.sku}));
  }
}

TEST_CASE("random recall is k / n capped at one") {
  CHECK(RandomRecall(20, 2000) == 0.01);
  CHECK(RandomRecall(5000, 2000) == 1.0);
}

TEST_CASE("holdout pairs become Excellent judgments") {
  const Small s;
  const auto j = HoldoutJudgments(s.data.holdout);
  REQUIRE(j.size() == s.data.holdout.size());
  CHECK(j[0].grade == eval::Grade::kExcellent);
  CHECK(j[0].sku == *s.data.holdout[0].right_sku);
}

TEST_CASE("train_all produces the four stage models and beats random on the holdout") {
  const Small s;
  const ModelSet models = TrainAll(s.data, s.corpus.catalog, SmallPlan());
  CHECK(models.merged.model_id == "merged");
  CHECK(models.q2q_log.size() == 2);
  CHECK(models.q2p_log.size() == 2);
  CHECK(models.q2q_q2p_log.size() == 2);
  CHECK(models.q2q.model_id != models.q2q_q2p.model_id);

  index::HnswParams params;
  params.rng_seed = 5;
  const std::size_t k = 20;
  const auto merged = ScoreHoldout(models.merged, s.corpus.catalog, s.data.holdout, k, params);
  CHECK(merged.model_id == "merged");
  CHECK(merged.queries > 0);
  CHECK(merged.recall > 2.0 * RandomRecall(k, s.corpus.catalog.size()));

  const encoder::Encoder encoder(models.merged);
  const auto entries = EmbedCatalog(encoder, s.corpus.catalog);
  REQUIRE(entries.size() == s.corpus.catalog.size());
  const auto idx = index::BuildExact(entries);
  const auto run = RetrieveAll(encoder, *idx, {"tv", "laptop"}, 5, "merged");
  CHECK(run.source_id == "merged");
  CHECK(run.results.at("tv").size() == 5);
}

}  // TEST_SUITE

}  // namespace
}  // namespace ebr::pipeline
