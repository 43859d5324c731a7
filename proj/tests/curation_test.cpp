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

#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "ebr/curation.hpp"
#include "ebr/error.hpp"
#include "ebr/io.hpp"
#include "ebr/text.hpp"
#include "test_util.hpp"

namespace ebr::curation {
namespace {

using corpus::EngagementAggregate;
using testing::Product;
using testing::TempDir;

EngagementAggregate Agg(std::string query, std::string sku, std::uint64_t uv) {
  EngagementAggregate a;
  a.query = std::move(query);
  a.sku = std::move(sku);
  a.unique_visitors = uv;
  a.signal_counts[0] = uv;
  return a;
}

corpus::Catalog TwoCategoryCatalog(std::size_t per_category) {
  std::vector<corpus::ProductRecord> products;
  for (std::size_t i = 0; i < per_category; ++i) {
    products.push_back(Product("a" + std::to_string(i),
                               {{"title", "alpha " + std::to_string(i)}, {"category", "A > x"}}));
    products.push_back(Product("b" + std::to_string(i),
                               {{"title", "beta " + std::to_string(i)}, {"category", "B > y > z"}}));
  }
  return corpus::Catalog(std::move(products));
}

std::uint64_t Choose2(std::uint64_t n) { return n * (n - 1) / 2; }

TEST_SUITE("curation") {

TEST_CASE("filter_min_visitors examples") {
  const std::vector<EngagementAggregate> in = {Agg("q1", "s", 1), Agg("q2", "s", 2), Agg("q3", "s", 7)};
  const auto out = FilterMinVisitors(in, 2);
  REQUIRE(out.size() == 2);
  CHECK(out[0].unique_visitors == 2);
  CHECK(out[1].unique_visitors == 7);
  CHECK(FilterMinVisitors(in, 1).size() == 3);
  CHECK(FilterMinVisitors({}, 2).empty());
  CHECK_THROWS_AS(FilterMinVisitors(in, 0), Error);
}

TEST_CASE("filter_min_visitors output is a thresholded subsequence") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EngagementAggregate> in;
    for (int i = rng() % 50; i > 0; --i) in.push_back(Agg("q" + std::to_string(i), "s", 1 + rng() % 6));
    const std::uint64_t threshold = 1 + rng() % 5;
    const auto out = FilterMinVisitors(in, threshold);
    std::size_t cursor = 0;
    for (const auto& a : out) {
      CHECK(a.unique_visitors >= threshold);
      while (cursor < in.size() && in[cursor].query != a.query) ++cursor;
      CHECK(cursor < in.size());
      ++cursor;
    }
    std::size_t expected = 0;
    for (const auto& a : in) expected += a.unique_visitors >= threshold ? 1 : 0;
    CHECK(out.size() == expected);
  }
}

TEST_CASE("stratified_sample caps each top-level category") {
  const auto catalog = TwoCategoryCatalog(100);
  std::vector<EngagementAggregate> in;
  for (int i = 0; i < 100; ++i) in.push_back(Agg("qa" + std::to_string(i), "a" + std::to_string(i), 2));
  for (int i = 0; i < 5; ++i) in.push_back(Agg("qb" + std::to_string(i), "b" + std::to_string(i), 2));

  const auto out = StratifiedSample(in, catalog, 10, 99);
  std::map<std::string, std::size_t> counts;
  for (const auto& a : out) ++counts[corpus::TopCategory(catalog.At(a.sku))];
  CHECK(counts["A"] == 10);
  CHECK(counts["B"] == 5);
  CHECK(StratifiedSample(in, catalog, 10, 99).size() == out.size());
  const auto again = StratifiedSample(in, catalog, 10, 99);
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(again[i].query == out[i].query);

  const auto all = StratifiedSample(in, catalog, 1000, 1);
  REQUIRE(all.size() == in.size());
  for (std::size_t i = 0; i < in.size(); ++i) CHECK(all[i].query == in[i].query);

  CHECK_THROWS_AS(StratifiedSample({Agg("q", "missing", 2)}, catalog, 10, 1), Error);
}

TEST_CASE("stratified_sample draws uniformly within a category") {
  const auto catalog = TwoCategoryCatalog(10);
  std::vector<EngagementAggregate> in;
  for (int i = 0; i < 10; ++i) in.push_back(Agg("q" + std::to_string(i), "a" + std::to_string(i), 2));
  std::map<std::string, int> hits;
  const int trials = 4000;
  for (int seed = 0; seed < trials; ++seed) {
    for (const auto& a : StratifiedSample(in, catalog, 3, seed)) ++hits[a.query];
  }
  // Each item is kept with probability 3/10.
  for (const auto& [query, n] : hits) CHECK(std::abs(n / double(trials) - 0.3) < 0.04);
  CHECK(hits.size() == 10);
}

TEST_CASE("generate_synthetic_queries examples") {
  const TemplateGenerator generator;
  const auto headphones = Product("p1", {{"title", "sony wh-1000xm5 wireless headphones"},
                                         {"category", "Audio > Headphones > Wireless Headphones"},
                                         {"spec:color", "Black"}});
  const auto one = GenerateSyntheticQueries(headphones, 1, generator, 5);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == "sony wh-1000xm5 wireless headphones");

  const auto ten = GenerateSyntheticQueries(headphones, 10, generator, 5);
  CHECK(ten.size() == 10);
  CHECK(std::set<std::string>(ten.begin(), ten.end()).size() == 10);
  for (const auto& q : ten) CHECK(NormalizeQuery(q) == q);
  CHECK(ten == GenerateSyntheticQueries(headphones, 10, generator, 5));
}

TEST_CASE("template generator covers the documented templates") {
  const TemplateGenerator generator;
  const auto tv = Product("p", {{"title", "Sony XR-55A80L OLED TV"},
                                {"category", "TV & Home Theater > TVs > OLED TVs"},
                                {"spec:screen_size", "55 in"}});
  const auto q = GenerateSyntheticQueries(tv, 8, generator, 1);
  const std::set<std::string> got(q.begin(), q.end());
  CHECK(got.contains("sony xr-55a80l oled tv"));
  CHECK(got.contains("xr-55a80l oled tv"));
  CHECK(got.contains("oled tvs"));
  CHECK(got.contains("sony oled tvs"));
  CHECK(got.contains("55 in oled tvs"));
}

TEST_CASE("degenerate product text reports how many queries were possible") {
  const TemplateGenerator generator;
  try {
    GenerateSyntheticQueries(Product("p", {{"title", "tv"}}), 10, generator, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerate);
    CHECK(std::string(e.what()).find("only 1") != std::string::npos);
  }
  CHECK_THROWS_AS(GenerateSyntheticQueries(Product("p", {{"category", "A"}}), 1, generator, 1),
                  Error);
}

TEST_CASE("import_synthetic_queries") {
  TempDir dir;
  const auto catalog = TwoCategoryCatalog(2);
  std::string rows;
  for (int i = 0; i < 10; ++i) rows += Json{{"sku", "a0"}, {"query", "Alpha Q" + std::to_string(i)}}.dump() + "\n";
  WriteFile(dir / "s.jsonl", rows);
  const auto pairs = ImportSyntheticQueries(dir / "s.jsonl", catalog);
  REQUIRE(pairs.size() == 10);
  CHECK(pairs[3].left == "alpha q3");
  CHECK(pairs[3].kind == PairKind::kQ2P);
  CHECK(pairs[3].source == PairSource::kSynthetic);
  CHECK(pairs[3].right_sku == "a0");

  WriteFile(dir / "e.jsonl", "");
  CHECK(ImportSyntheticQueries(dir / "e.jsonl", catalog).empty());

  WriteFile(dir / "u.jsonl", rows + Json{{"sku", "nope"}, {"query", "x"}}.dump() + "\n");
  try {
    ImportSyntheticQueries(dir / "u.jsonl", catalog);
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("nope") != std::string::npos);
    CHECK(msg.find(":11") != std::string::npos);
  }
}

TEST_CASE("build_q2p_dataset examples") {
  const auto catalog = TwoCategoryCatalog(3);
  const std::vector<EngagementAggregate> eng = {Agg("q1", "a0", 2), Agg("q2", "a1", 2), Agg("q3", "b0", 3)};
  auto synth = [&](std::string q, std::string sku) {
    return TrainingPair{std::move(q), RenderProduct(catalog.At(sku)), PairKind::kQ2P,
                        PairSource::kSynthetic, sku};
  };
  CHECK(BuildQ2pDataset(eng, {synth("s1", "a2"), synth("s2", "b1")}, catalog).size() == 5);
  const auto dup = BuildQ2pDataset({Agg("q1", "a0", 2)}, {synth("q1", "a0")}, catalog);
  REQUIRE(dup.size() == 1);
  CHECK(dup[0].source == PairSource::kEngagement);
  CHECK(dup[0].right == "alpha 0");
  CHECK(BuildQ2pDataset({}, {}, catalog).empty());
}

TEST_CASE("build_q2q_dataset examples") {
  SUBCASE("three queries give all three pairs") {
    const auto pairs = BuildQ2qDataset({Agg("c", "p", 2), Agg("a", "p", 2), Agg("b", "p", 2)}, 400, 1);
    REQUIRE(pairs.size() == 3);
    std::set<std::pair<std::string, std::string>> got;
    for (const auto& p : pairs) got.emplace(p.left, p.right);
    CHECK(got == std::set<std::pair<std::string, std::string>>{{"a", "b"}, {"a", "c"}, {"b", "c"}});
  }
  SUBCASE("thirty queries are capped at 400 of 435") {
    std::vector<EngagementAggregate> in;
    for (int i = 0; i < 30; ++i) in.push_back(Agg("q" + std::to_string(100 + i), "p", 2));
    Q2qStats stats;
    const auto pairs = BuildQ2qDataset(in, 400, 7, &stats);
    CHECK(Choose2(30) == 435);
    CHECK(pairs.size() == 400);
    CHECK(stats.distinct_queries["p"] == 30);
    CHECK(stats.sampled_pairs["p"] == 400);
  }
  SUBCASE("one query gives nothing") { CHECK(BuildQ2qDataset({Agg("a", "p", 2)}, 400, 1).empty()); }
}

TEST_CASE("build_q2q_dataset invariants on random inputs") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    // Disjoint query vocabularies per product so per-product counts are observable.
    std::vector<EngagementAggregate> in;
    std::map<std::string, std::set<std::string>> queries;
    for (int p = 0; p < 5; ++p) {
      const std::string sku = "p" + std::to_string(p);
      for (int i = rng() % 35; i > 0; --i) {
        const std::string q = sku + "_q" + std::to_string(rng() % 40);
        in.push_back(Agg(q, sku, 2));
        queries[sku].insert(q);
      }
    }
    const std::uint64_t cap = 1 + rng() % 300;
    const auto pairs = BuildQ2qDataset(in, cap, rng());
    std::map<std::string, std::uint64_t> per_product;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& pair : pairs) {
      CHECK(pair.kind == PairKind::kQ2Q);
      CHECK(pair.left < pair.right);
      CHECK(seen.emplace(pair.left, pair.right).second);
      ++per_product[pair.left.substr(0, pair.left.find('_'))];
    }
    for (const auto& [sku, qs] : queries) {
      CHECK(per_product[sku] == std::min<std::uint64_t>(Choose2(qs.size()), cap));
    }
  }
}

TEST_CASE("q2q pair sampling is uniform over candidates") {
  std::vector<EngagementAggregate> in;
  for (int i = 0; i < 30; ++i) in.push_back(Agg("q" + std::to_string(100 + i), "p", 2));
  std::map<std::pair<std::string, std::string>, int> hits;
  const int trials = 300;
  for (int seed = 0; seed < trials; ++seed) {
    for (const auto& p : BuildQ2qDataset(in, 400, seed)) ++hits[{p.left, p.right}];
  }
  REQUIRE(hits.size() == 435);
  // Inclusion probability 400/435; binomial sd is about 4.7 at 300 trials.
  const double expected = trials * 400.0 / 435.0;
  for (const auto& [pair, n] : hits) CHECK(std::abs(n - expected) < 30);
}

TEST_CASE("training pairs round-trip and curation is deterministic") {
  TempDir dir;
  std::vector<EngagementAggregate> in;
  for (int i = 0; i < 12; ++i) in.push_back(Agg("q" + std::to_string(i), "p" + std::to_string(i % 2), 2));
  const auto pairs = BuildQ2qDataset(in, 5, 3);
  CHECK(pairs == BuildQ2qDataset(in, 5, 3));
  SaveTrainingPairs(dir / "p.jsonl", pairs);
  CHECK(LoadTrainingPairs(dir / "p.jsonl") == pairs);

  const std::vector<TrainingPair> q2p = {{"tv", "Sony TV", PairKind::kQ2P, PairSource::kSynthetic, "s1"}};
  SaveTrainingPairs(dir / "q.jsonl", q2p);
  CHECK(LoadTrainingPairs(dir / "q.jsonl") == q2p);
}

TEST_CASE("curation config validation") {
  CurationConfig c;
  CHECK(c.min_unique_visitors == 2);
  CHECK(c.synthetic_queries_per_product == 10);
  CHECK(c.q2q_max_pairs_per_product == 400);
  CHECK_NOTHROW(c.Validate());
  c.min_unique_visitors = 0;
  CHECK_THROWS_AS(c.Validate(), Error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace ebr::curation
