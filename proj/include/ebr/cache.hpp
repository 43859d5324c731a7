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

#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ebr::service {

struct CacheConfig {
  std::size_t capacity = 10000;
  std::int64_t ttl_seconds = 3600;

  void Validate() const;
};

// Thread-safe LRU cache of query embeddings with a TTL measured on a
// monotonic clock. Expired entries are dropped on read and never returned.
class EmbeddingCache {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  struct Stats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t evictions = 0;
    std::uint64_t expirations = 0;
    std::size_t size = 0;
  };

  explicit EmbeddingCache(CacheConfig config, Clock clock = std::chrono::steady_clock::now);

  std::optional<std::vector<float>> Get(const std::string& key);
  void Put(const std::string& key, std::vector<float> vector);
  Stats stats() const;

  // Keys pair the normalized query with the model id, so swapping the
  // checkpoint never serves vectors from the previous model.
  static std::string Key(std::string_view normalized_query, std::string_view model_id);

 private:
  struct Entry {
    std::string key;
    std::vector<float> vector;
    std::chrono::steady_clock::time_point inserted_at;
  };

  CacheConfig config_;
  Clock clock_;
  mutable std::mutex mu_;
  std::list<Entry> lru_;  // most recent first
  std::unordered_map<std::string, std::list<Entry>::iterator> map_;
  Stats stats_;
};

}  // namespace ebr::service
