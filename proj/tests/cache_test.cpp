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


#include <chrono>
#include <string>
#include <vector>

#include "doctest.h"
#include "ebr/cache.hpp"
#include "ebr/error.hpp"

namespace ebr::service {
namespace {

struct FakeClock {
  std::chrono::steady_clock::time_point now{};
  EmbeddingCache::Clock fn() {
    return [this] { return now; };
  }
  void Advance(int seconds) { now += std::chrono::seconds(seconds); }
};

std::vector<float> V(float x) { return {x, 0.0f}; }

TEST_SUITE("cache") {

TEST_CASE("get after put returns the stored vector") {
  EmbeddingCache cache({4, 60});
  CHECK_FALSE(cache.Get("a").has_value());
  cache.Put("a", V(1));
  REQUIRE(cache.Get("a").has_value());
  CHECK(*cache.Get("a") == V(1));
  const auto s = cache.stats();
  CHECK(s.hits == 2);
  CHECK(s.misses == 1);
  CHECK(s.size == 1);
}

TEST_CASE("capacity one keeps only the latest key") {
  EmbeddingCache cache({1, 60});
  cache.Put("a", V(1));
  cache.Put("b", V(2));
  CHECK_FALSE(cache.Get("a").has_value());
  CHECK(*cache.Get("b") == V(2));
  CHECK(cache.stats().evictions == 1);
  CHECK(cache.stats().size == 1);
}

TEST_CASE("eviction removes the least recently used entry") {
  EmbeddingCache cache({2, 60});
  cache.Put("a", V(1));
  cache.Put("b", V(2));
  CHECK(cache.Get("a").has_value());  // a is now most recent
  cache.Put("c", V(3));
  CHECK(cache.Get("a").has_value());
  CHECK_FALSE(cache.Get("b").has_value());
  CHECK(cache.Get("c").has_value());
}

TEST_CASE("re-putting a key refreshes it without eviction") {
  EmbeddingCache cache({2, 60});
  cache.Put("a", V(1));
  cache.Put("b", V(2));
  cache.Put("a", V(9));
  cache.Put("c", V(3));
  CHECK(*cache.Get("a") == V(9));
  CHECK_FALSE(cache.Get("b").has_value());
  CHECK(cache.stats().evictions == 1);
}

TEST_CASE("entries expire after ttl seconds") {
  FakeClock clock;
  EmbeddingCache cache({8, 10}, clock.fn());
  cache.Put("a", V(1));
  clock.Advance(9);
  CHECK(cache.Get("a").has_value());
  clock.Advance(1);
  CHECK_FALSE(cache.Get("a").has_value());
  const auto s = cache.stats();
  CHECK(s.expirations == 1);
  CHECK(s.size == 0);
  CHECK(s.hits == 1);
  CHECK(s.misses == 1);
}

TEST_CASE("a hit does not extend the ttl") {
  FakeClock clock;
  EmbeddingCache cache({8, 10}, clock.fn());
  cache.Put("a", V(1));
  clock.Advance(6);
  CHECK(cache.Get("a").has_value());
  clock.Advance(6);
  CHECK_FALSE(cache.Get("a").has_value());
}

TEST_CASE("keys separate models") {
  CHECK(EmbeddingCache::Key("tv", "m1") != EmbeddingCache::Key("tv", "m2"));
  CHECK(EmbeddingCache::Key("tv", "m1") == EmbeddingCache::Key("tv", "m1"));
  // The separator keeps "a"+"bc" apart from "ab"+"c".
  CHECK(EmbeddingCache::Key("bc", "a") != EmbeddingCache::Key("c", "ab"));
}

TEST_CASE("invalid configuration is rejected") {
  CHECK_THROWS_AS(EmbeddingCache({0, 60}), Error);
  CHECK_THROWS_AS(EmbeddingCache({1, 0}), Error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace ebr::service
