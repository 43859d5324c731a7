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


#include <string>

#include "doctest.h"
#include "ebr/config.hpp"
#include "ebr/error.hpp"
#include "ebr/io.hpp"
#include "test_util.hpp"

namespace ebr::config {
namespace {

#ifndef EBR_SOURCE_DIR
#error "EBR_SOURCE_DIR must point at the repository root"
#endif

ErrorCode CodeOf(const std::string& text) {
  try {
    ParseConfig(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected the config to be rejected");
  return ErrorCode::kIo;
}

TEST_SUITE("config") {

TEST_CASE("an empty config yields the defaults") {
  const PipelineConfig c = ParseConfig("");
  CHECK_FALSE(c.seed.has_value());
  CHECK(c.train.q2p.batch_size == 32);
  CHECK(c.train.q2p.scale == 20.0);
  CHECK(c.train.q2p.learning_rate == 0.05);
  CHECK(c.train.merge_weights == std::array<double, 3>{0.2, 0.4, 0.4});
  CHECK(c.curation.min_unique_visitors == 2);
  CHECK(c.curation.per_category_cap == 1000);
  CHECK(c.index.m == 16);
  CHECK(c.index.ef_construction == 200);
  CHECK(c.index.ef_search == 100);
  CHECK(c.cache.capacity == 10000);
  CHECK(c.cache.ttl_seconds == 3600);
  CHECK(c.eval.n_queries == 100);
  CHECK(c.eval.products_per_query == 20);
  CHECK(c.eval.relevance_threshold == eval::Grade::kGood);
}

TEST_CASE("the bundled pipeline config parses and resolves paths") {
  const std::filesystem::path file = std::filesystem::path(EBR_SOURCE_DIR) / "configs" / "pipeline.toml";
  const PipelineConfig c = LoadConfig(file);
  REQUIRE(c.seed.has_value());
  CHECK(c.train.q2p.rng_seed == *c.seed);
  CHECK(c.Path("catalog").is_absolute() == file.is_absolute());
  CHECK(c.Path("catalog").filename() == "catalog.jsonl");
  CHECK_THROWS_AS(c.Path("nonexistent"), Error);
}

TEST_CASE("stage sections override the shared training settings") {
  const PipelineConfig c = ParseConfig(R"(
[training]
learning_rate = 0.1
epochs = 3
[training.q2q]
epochs = 7
)");
  CHECK(c.train.q2q.epochs == 7);
  CHECK(c.train.q2p.epochs == 3);
  CHECK(c.train.q2q.learning_rate == 0.1);
  CHECK(c.train.q2q.stage == training::Stage::kQ2Q);
  CHECK(c.train.q2p.stage == training::Stage::kQ2P);
}

TEST_CASE("the global seed reaches every component") {
  const PipelineConfig c = ParseConfig("seed = 42\n[curation]\nrng_seed = 3\n");
  CHECK(c.corpus.seed == 42);
  CHECK(c.curation.rng_seed == 42);
  CHECK(c.train.init_seed == 42);
  CHECK(c.train.q2q.rng_seed == 42);
  CHECK(c.train.q2p.rng_seed == 42);
  CHECK(c.train.pretrain_config.rng_seed == 42);
  CHECK(c.index.rng_seed == 42);
  CHECK(c.eval.rng_seed == 42);
}

TEST_CASE("invalid configs are rejected") {
  CHECK(CodeOf("[training]\nbatch_size = 0\n") == ErrorCode::kInvalidConfig);
  CHECK(CodeOf("[training]\nscale = 0.0\n") == ErrorCode::kInvalidConfig);
  CHECK(CodeOf("[training]\noptimizer = \"rmsprop\"\n") == ErrorCode::kInvalidConfig);
  CHECK(CodeOf("[curation]\nmin_unique_visitors = 0\n") == ErrorCode::kInvalidConfig);
  CHECK(CodeOf("[index]\nm = 1\n") == ErrorCode::kInvalidConfig);
  CHECK(CodeOf("[cache]\ncapacity = 0\n") == ErrorCode::kInvalidConfig);
  CHECK(CodeOf("[merge]\nweights = [0.5, 0.5]\n") == ErrorCode::kInvalidConfig);
  CHECK(CodeOf("[eval]\nrelevance_threshold = \"Perfect\"\n") == ErrorCode::kInvalidConfig);
}

TEST_CASE("unknown keys and wrong types are errors") {
  CHECK(CodeOf("[training]\nbatchsize = 32\n") == ErrorCode::kInvalidConfig);
  CHECK(CodeOf("[bogus]\nx = 1\n") == ErrorCode::kInvalidConfig);
  CHECK(CodeOf("[training]\nbatch_size = \"big\"\n") == ErrorCode::kInvalidConfig);
}

TEST_CASE("malformed toml reports the line") {
  try {
    ParseConfig("seed = 1\n[training\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidConfig);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

}  // TEST_SUITE

}  // namespace
}  // namespace ebr::config
