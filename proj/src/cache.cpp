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

#include "ebr/cache.hpp"

#include "ebr/error.hpp"

namespace ebr::service {

void CacheConfig::Validate() const {
  if (capacity < 1) throw Error(ErrorCode::kInvalidConfig, "cache capacity must be >= 1");
  if (ttl_seconds < 1) throw Error(ErrorCode::kInvalidConfig, "cache ttl_seconds must be >= 1");
}

EmbeddingCache::EmbeddingCache(CacheConfig config, Clock clock)
    : config_(config), clock_(std::move(clock)) {
  config_.Validate();
}

std::optional<std::vector<float>> EmbeddingCache::Get(const std::string& key) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(key);
  if (it == map_.end()) {
    ++stats_.misses;
    return std::nullopt;
  }
  if (clock_() - it->second->inserted_at >= std::chrono::seconds(config_.ttl_seconds)) {
    lru_.erase(it->second);
    map_.erase(it);
    ++stats_.expirations;
    ++stats_.misses;
    return std::nullopt;
  }
  lru_.splice(lru_.begin(), lru_, it->second);
  ++stats_.hits;
  return it->second->vector;
}

void EmbeddingCache::Put(const std::string& key, std::vector<float> vector) {
  std::lock_guard<std::mutex> lock(mu_);
  const auto now = clock_();
  if (auto it = map_.find(key); it != map_.end()) {
    it->second->vector = std::move(vector);
    it->second->inserted_at = now;
    lru_.splice(lru_.begin(), lru_, it->second);
    return;
  }
  if (map_.size() >= config_.capacity) {
    map_.erase(lru_.back().key);
    lru_.pop_back();
    ++stats_.evictions;
  }
  lru_.push_front(Entry{key, std::move(vector), now});
  map_.emplace(key, lru_.begin());
}

EmbeddingCache::Stats EmbeddingCache::stats() const {
  std::lock_guard<std::mutex> lock(mu_);
  Stats s = stats_;
  s.size = map_.size();
  return s;
}

std::string EmbeddingCache::Key(std::string_view normalized_query, std::string_view model_id) {
  std::string key(model_id);
  key.push_back('\x1f');
  key.append(normalized_query);
  return key;
}

}  // namespace ebr::service
