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
#include "ebr/io.hpp"

namespace ebr::eval {

enum class Grade : std::uint8_t { kIrrelevant = 0, kAcceptable = 1, kGood = 2, kExcellent = 3 };

std::string_view GradeName(Grade grade);
std::optional<Grade> ParseGrade(std::string_view name);

struct RetrievalRun {
  std::string source_id;
  std::map<std::string, std::vector<std::string>> results;  // query -> skus, best first

  // Throws kInvalidArgument if any ranked list repeats a sku.
  void Validate() const;
};

struct PooledCandidate {
  std::string query;
  std::string sku;
  std::map<std::string, std::size_t> ranks;  // source_id -> 1-based rank
  double mean_rank = 0.0;
};

struct JudgedPair {
  std::string query;
  std::string sku;
  Grade grade = Grade::kIrrelevant;
  std::string annotator_id;
  std::int64_t ts = 0;
};

struct EvalConfig {
  std::size_t n_queries = 100;
  std::size_t products_per_query = 20;
  Grade relevance_threshold = Grade::kGood;
  // Count a source that did not return a candidate at rank (list length + 1)
  // instead of leaving it out of the mean.
  bool impute_missing_rank = false;
  // Divide by min(|relevant|, k) instead of |relevant|.
  bool capped_denominator = false;
  std::uint64_t rng_seed = 0;

  void Validate() const;
};

// Weighted sampling without replacement via exponential keys
// (key = -ln(u) / w, smallest keys win). u is derived from (seed, item
// key), so the result does not depend on input order. Returns indices in
// draw order.
std::vector<std::size_t> WeightedSampleWithoutReplacement(const std::vector<std::string>& keys,
                                                          const std::vector<double>& weights,
                                                          std::size_t n, std::uint64_t seed);

// Draws n queries with weight ln(1 + count). All queries (in draw order)
// when n >= history size. Throws on empty history.
std::vector<std::string> SampleEvalQueries(const corpus::QueryHistory& history, std::size_t n,
                                           std::uint64_t seed);

// Union of every run's list for `query` with per-source ranks. Candidates
// are ordered by (mean_rank, sku). Throws kNotFound when no run has the
// query.
std::vector<PooledCandidate> PoolCandidates(const std::string& query,
                                            const std::vector<RetrievalRun>& runs,
                                            bool impute_missing_rank = false);

// Draws m candidates with weight 1 / mean_rank.
std::vector<PooledCandidate> SamplePool(const std::vector<PooledCandidate>& pool, std::size_t m,
                                        std::uint64_t seed);

struct AnnotationTask {
  std::string task_id;
  std::string query;
  std::string sku;
  std::string title;
  std::string category;
};

// Task ids are "t" plus a zero-padded sequence number, so lexicographic
// and creation order agree.
std::vector<AnnotationTask> MakeAnnotationTasks(const std::vector<PooledCandidate>& samples,
                                                const corpus::Catalog& catalog);
void ExportAnnotationTasks(const std::filesystem::path& path,
                           const std::vector<AnnotationTask>& tasks);
std::vector<AnnotationTask> LoadAnnotationTasks(const std::filesystem::path& path);

Json JudgmentToJson(const JudgedPair& judgment);

// Validates grades (and skus when a catalog is given); keeps the latest ts
// per (query, sku, annotator), later lines winning ties.
std::vector<JudgedPair> ImportJudgments(const std::filesystem::path& path,
                                        const corpus::Catalog* catalog = nullptr);
std::vector<JudgedPair> DedupJudgments(const std::vector<JudgedPair>& judgments);
void SaveJudgments(const std::filesystem::path& path, const std::vector<JudgedPair>& judgments);

// Query -> skus whose mean grade across annotators is >= threshold.
std::map<std::string, std::vector<std::string>> RelevantSets(const std::vector<JudgedPair>& judgments,
                                                             Grade threshold);

struct RecallReport {
  std::size_t k = 0;
  std::map<std::string, double> per_query;
  double macro = 0.0;
  std::size_t skipped_queries = 0;  // judged queries with no relevant product
};

RecallReport RecallAtK(const RetrievalRun& run, const std::vector<JudgedPair>& judgments,
                       std::size_t k, Grade threshold, bool capped_denominator = false);

struct ModelScore {
  std::string model_id;
  double recall_at_25 = 0.0;
  double recall_at_200 = 0.0;
  std::size_t skipped_queries = 0;
};

struct ComparisonReport {
  std::vector<ModelScore> models;
  // (a, b) -> recall(a) - recall(b) in percentage points.
  struct Delta {
    std::string a, b;
    double recall_at_25_pp = 0.0;
    double recall_at_200_pp = 0.0;
  };
  std::vector<Delta> deltas;

  Json ToJson() const;
};

// Scores every run against the same judgments; model id is the run's
// source_id.
ComparisonReport CompareModels(const std::vector<RetrievalRun>& runs,
                               const std::vector<JudgedPair>& judgments, Grade threshold,
                               bool capped_denominator = false);

std::vector<RetrievalRun> LoadRuns(const std::filesystem::path& path);
void SaveRuns(const std::filesystem::path& path, const std::vector<RetrievalRun>& runs);

}  // namespace ebr::eval
