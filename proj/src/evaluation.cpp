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

#include "ebr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

#include "ebr/error.hpp"
#include "ebr/random.hpp"
#include "ebr/text.hpp"

namespace ebr::eval {
namespace {

constexpr std::string_view kGradeNames[] = {"Irrelevant", "Acceptable", "Good", "Excellent"};

std::string PoolKey(const std::string& query, const std::string& sku) {
  return query + '\x1f' + sku;
}

}  // namespace

std::string_view GradeName(Grade grade) { return kGradeNames[static_cast<std::size_t>(grade)]; }

std::optional<Grade> ParseGrade(std::string_view name) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (kGradeNames[i] == name) return static_cast<Grade>(i);
  }
  return std::nullopt;
}

void RetrievalRun::Validate() const {
  for (const auto& [query, skus] : results) {
    std::set<std::string> seen;
    for (const auto& sku : skus) {
      if (!seen.insert(sku).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "run " + source_id + " lists " + sku + " twice for query '" + query + "'");
      }
    }
  }
}

void EvalConfig::Validate() const {
  if (n_queries < 1) throw Error(ErrorCode::kInvalidConfig, "n_queries must be >= 1");
  if (products_per_query < 1) throw Error(ErrorCode::kInvalidConfig, "products_per_query must be >= 1");
}

std::vector<std::size_t> WeightedSampleWithoutReplacement(const std::vector<std::string>& keys,
                                                          const std::vector<double>& weights,
                                                          std::size_t n, std::uint64_t seed) {
  if (keys.size() != weights.size()) {
    throw Error(ErrorCode::kInvalidArgument, "keys and weights differ in length");
  }
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
      throw Error(ErrorCode::kInvalidArgument, "sampling weights must be finite and >= 0");
    }
    const double u = KeyedUniform(seed, keys[i]);
    const double key = weights[i] > 0.0 ? -std::log(u) / weights[i]
                                        : std::numeric_limits<double>::infinity();
    order.emplace_back(key, i);
  }
  // Ties (only possible for zero weights) fall back to the item key.
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return keys[a.second] < keys[b.second];
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(n, order.size()); ++i) out.push_back(order[i].second);
  return out;
}

std::vector<std::string> SampleEvalQueries(const corpus::QueryHistory& history, std::size_t n,
                                           std::uint64_t seed) {
  if (history.empty()) throw Error(ErrorCode::kInvalidArgument, "query history is empty");
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  std::vector<std::string> keys;
  std::vector<double> weights;
  for (const auto& [query, count] : history) {
    keys.push_back(query);
    weights.push_back(std::log1p(static_cast<double>(count)));
  }
  std::vector<std::string> out;
  for (std::size_t i : WeightedSampleWithoutReplacement(keys, weights, n, seed)) out.push_back(keys[i]);
  return out;
}

std::vector<PooledCandidate> PoolCandidates(const std::string& query,
                                            const std::vector<RetrievalRun>& runs,
                                            bool impute_missing_rank) {
  std::map<std::string, PooledCandidate> pool;
  std::vector<const RetrievalRun*> contributing;
  for (const auto& run : runs) {
    auto it = run.results.find(query);
    if (it == run.results.end()) continue;
    contributing.push_back(&run);
    for (std::size_t r = 0; r < it->second.size(); ++r) {
      PooledCandidate& c = pool[it->second[r]];
      c.query = query;
      c.sku = it->second[r];
      c.ranks.emplace(run.source_id, r + 1);
    }
  }
  if (contributing.empty()) {
    throw Error(ErrorCode::kNotFound, "no run retrieved anything for query '" + query + "'");
  }
  std::vector<PooledCandidate> out;
  for (auto& [sku, c] : pool) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& [source, rank] : c.ranks) {
      sum += static_cast<double>(rank);
      ++count;
    }
    if (impute_missing_rank) {
      for (const RetrievalRun* run : contributing) {
        if (c.ranks.contains(run->source_id)) continue;
        sum += static_cast<double>(run->results.at(query).size() + 1);
        ++count;
      }
    }
    c.mean_rank = sum / static_cast<double>(count);
    out.push_back(std::move(c));
  }
  std::sort(out.begin(), out.end(), [](const PooledCandidate& a, const PooledCandidate& b) {
    return std::tie(a.mean_rank, a.sku) < std::tie(b.mean_rank, b.sku);
  });
  return out;
}

std::vector<PooledCandidate> SamplePool(const std::vector<PooledCandidate>& pool, std::size_t m,
                                        std::uint64_t seed) {
  if (pool.empty()) throw Error(ErrorCode::kInvalidArgument, "candidate pool is empty");
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "m must be >= 1");
  std::vector<std::string> keys;
  std::vector<double> weights;
  for (const auto& c : pool) {
    keys.push_back(PoolKey(c.query, c.sku));
    weights.push_back(1.0 / c.mean_rank);
  }
  std::vector<PooledCandidate> out;
  for (std::size_t i : WeightedSampleWithoutReplacement(keys, weights, m, seed)) out.push_back(pool[i]);
  return out;
}

std::vector<AnnotationTask> MakeAnnotationTasks(const std::vector<PooledCandidate>& samples,
                                                const corpus::Catalog& catalog) {
  std::vector<AnnotationTask> tasks;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& product = catalog.At(samples[i].sku);
    char id[32];
    std::snprintf(id, sizeof(id), "t%06zu", i + 1);
    tasks.push_back({id, samples[i].query, samples[i].sku, std::string(product.FieldOr("title")),
                     std::string(product.FieldOr("category"))});
  }
  return tasks;
}

void ExportAnnotationTasks(const std::filesystem::path& path,
                           const std::vector<AnnotationTask>& tasks) {
  std::vector<Json> rows;
  for (const auto& t : tasks) {
    rows.push_back(Json{{"task_id", t.task_id},
                        {"query", t.query},
                        {"sku", t.sku},
                        {"title", t.title},
                        {"category", t.category}});
  }
  WriteJsonl(path, rows);
}

std::vector<AnnotationTask> LoadAnnotationTasks(const std::filesystem::path& path) {
  std::vector<AnnotationTask> tasks;
  std::set<std::string> ids;
  ForEachJsonl(path, [&](std::size_t line, const Json& obj) {
    AnnotationTask t;
    t.task_id = RequireString(obj, "task_id", line);
    t.query = RequireString(obj, "query", line);
    t.sku = RequireString(obj, "sku", line);
    t.title = obj.value("title", std::string());
    t.category = obj.value("category", std::string());
    if (!ids.insert(t.task_id).second) {
      throw Error(ErrorCode::kDuplicate, "line " + std::to_string(line) + ": duplicate task_id " + t.task_id);
    }
    tasks.push_back(std::move(t));
  });
  return tasks;
}

Json JudgmentToJson(const JudgedPair& j) {
  return Json{{"query", j.query},
              {"sku", j.sku},
              {"grade", GradeName(j.grade)},
              {"annotator_id", j.annotator_id},
              {"ts", j.ts}};
}

std::vector<JudgedPair> DedupJudgments(const std::vector<JudgedPair>& judgments) {
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> latest;
  for (std::size_t i = 0; i < judgments.size(); ++i) {
    const auto& j = judgments[i];
    auto [it, inserted] = latest.emplace(std::make_tuple(j.query, j.sku, j.annotator_id), i);
    if (!inserted && judgments[it->second].ts <= j.ts) it->second = i;
  }
  std::vector<std::size_t> keep;
  for (const auto& [key, i] : latest) keep.push_back(i);
  std::sort(keep.begin(), keep.end());
  std::vector<JudgedPair> out;
  for (std::size_t i : keep) out.push_back(judgments[i]);
  return out;
}

std::vector<JudgedPair> ImportJudgments(const std::filesystem::path& path,
                                        const corpus::Catalog* catalog) {
  std::vector<JudgedPair> all;
  ForEachJsonl(path, [&](std::size_t line, const Json& obj) {
    JudgedPair j;
    j.query = RequireString(obj, "query", line);
    j.sku = RequireString(obj, "sku", line);
    const std::string grade = RequireString(obj, "grade", line);
    auto parsed = ParseGrade(grade);
    if (!parsed) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line) +
                                         ": unknown grade '" + grade + "'");
    }
    j.grade = *parsed;
    j.annotator_id = RequireString(obj, "annotator_id", line);
    j.ts = RequireInt(obj, "ts", line);
    if (catalog != nullptr && catalog->Find(j.sku) == nullptr) {
      throw Error(ErrorCode::kNotFound, path.string() + ":" + std::to_string(line) +
                                            ": unknown sku " + j.sku);
    }
    all.push_back(std::move(j));
  });
  return DedupJudgments(all);
}

void SaveJudgments(const std::filesystem::path& path, const std::vector<JudgedPair>& judgments) {
  std::vector<Json> rows;
  for (const auto& j : judgments) rows.push_back(JudgmentToJson(j));
  WriteJsonl(path, rows);
}

std::map<std::string, std::vector<std::string>> RelevantSets(const std::vector<JudgedPair>& judgments,
                                                             Grade threshold) {
  std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> grades;
  for (const auto& j : DedupJudgments(judgments)) {
    auto& acc = grades[j.query][j.sku];
    acc.first += static_cast<double>(j.grade);
    acc.second += 1;
  }
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [query, skus] : grades) {
    auto& relevant = out[query];
    for (const auto& [sku, acc] : skus) {
      if (acc.first / static_cast<double>(acc.second) >= static_cast<double>(threshold)) {
        relevant.push_back(sku);
      }
    }
  }
  return out;
}

RecallReport RecallAtK(const RetrievalRun& run, const std::vector<JudgedPair>& judgments,
                       std::size_t k, Grade threshold, bool capped_denominator) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  RecallReport report;
  report.k = k;
  double sum = 0.0;
  for (const auto& [query, relevant] : RelevantSets(judgments, threshold)) {
    if (relevant.empty()) {
      ++report.skipped_queries;
      continue;
    }
    std::set<std::string> top;
    if (auto it = run.results.find(query); it != run.results.end()) {
      const auto& ranked = it->second;
      top.insert(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked.size())));
    }
    std::size_t hits = 0;
    for (const auto& sku : relevant) hits += top.count(sku);
    const std::size_t denom = capped_denominator ? std::min(relevant.size(), k) : relevant.size();
    const double recall = static_cast<double>(hits) / static_cast<double>(denom);
    report.per_query[query] = recall;
    sum += recall;
  }
  if (!report.per_query.empty()) report.macro = sum / static_cast<double>(report.per_query.size());
  return report;
}

Json ComparisonReport::ToJson() const {
  Json out{{"models", Json::array()}, {"deltas", Json::array()}};
  for (const auto& m : models) {
    out["models"].push_back(Json{{"model_id", m.model_id},
                                 {"recall_at_25", m.recall_at_25},
                                 {"recall_at_200", m.recall_at_200},
                                 {"skipped_queries", m.skipped_queries}});
  }
  for (const auto& d : deltas) {
    out["deltas"].push_back(Json{{"a", d.a},
                                 {"b", d.b},
                                 {"recall_at_25_pp", d.recall_at_25_pp},
                                 {"recall_at_200_pp", d.recall_at_200_pp}});
  }
  return out;
}

ComparisonReport CompareModels(const std::vector<RetrievalRun>& runs,
                               const std::vector<JudgedPair>& judgments, Grade threshold,
                               bool capped_denominator) {
  ComparisonReport report;
  for (const auto& run : runs) {
    run.Validate();
    RecallReport r25 = RecallAtK(run, judgments, 25, threshold, capped_denominator);
    RecallReport r200 = RecallAtK(run, judgments, 200, threshold, capped_denominator);
    report.models.push_back({run.source_id, r25.macro, r200.macro, r200.skipped_queries});
  }
  for (std::size_t i = 0; i < report.models.size(); ++i) {
    for (std::size_t j = i + 1; j < report.models.size(); ++j) {
      const auto& a = report.models[i];
      const auto& b = report.models[j];
      report.deltas.push_back({a.model_id, b.model_id, 100.0 * (a.recall_at_25 - b.recall_at_25),
                               100.0 * (a.recall_at_200 - b.recall_at_200)});
    }
  }
  return report;
}

std::vector<RetrievalRun> LoadRuns(const std::filesystem::path& path) {
  std::vector<RetrievalRun> runs;
  std::map<std::string, std::size_t> by_source;
  ForEachJsonl(path, [&](std::size_t line, const Json& obj) {
    const std::string source = RequireString(obj, "source_id", line);
    const std::string query = RequireString(obj, "query", line);
    auto it = obj.find("ranked_skus");
    if (it == obj.end() || !it->is_array()) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": missing ranked_skus");
    }
    auto [pos, inserted] = by_source.emplace(source, runs.size());
    if (inserted) runs.push_back({source, {}});
    runs[pos->second].results[query] = it->get<std::vector<std::string>>();
  });
  for (const auto& run : runs) run.Validate();
  return runs;
}

void SaveRuns(const std::filesystem::path& path, const std::vector<RetrievalRun>& runs) {
  std::vector<Json> rows;
  for (const auto& run : runs) {
    for (const auto& [query, skus] : run.results) {
      rows.push_back(Json{{"source_id", run.source_id}, {"query", query}, {"ranked_skus", skus}});
    }
  }
  WriteJsonl(path, rows);
}

}  // namespace ebr::eval
