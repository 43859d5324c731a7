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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ebr/cache.hpp"
#include "ebr/encoder.hpp"
#include "ebr/evaluation.hpp"
#include "ebr/index.hpp"

namespace httplib {
class Server;
}

namespace ebr::service {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Produces query-tower vectors for normalized queries.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<float> Embed(const std::string& normalized_query) = 0;
  virtual std::string model_id() const = 0;
};

class LocalEmbedder final : public Embedder {
 public:
  explicit LocalEmbedder(const encoder::EncoderCheckpoint& checkpoint)
      : encoder_(checkpoint) {}

  std::vector<float> Embed(const std::string& normalized_query) override;
  std::string model_id() const override { return encoder_.model_id(); }
  const encoder::Encoder& encoder() const { return encoder_; }

  std::uint64_t invocations() const { return invocations_.load(); }

 private:
  encoder::Encoder encoder_;
  std::atomic<std::uint64_t> invocations_{0};
};

// Calls POST /v1/embed on another service instance, e.g. an embedding
// service running in a different network zone.
class RemoteEmbedder final : public Embedder {
 public:
  // `base_url` like "http://host:8080". Reads the upstream model id from
  // GET /v1/stats.
  explicit RemoteEmbedder(std::string base_url);

  std::vector<float> Embed(const std::string& normalized_query) override;
  std::string model_id() const override { return model_id_; }
  std::uint64_t requests() const { return requests_.load(); }

 private:
  std::string base_url_;
  std::string model_id_;
  std::atomic<std::uint64_t> requests_{0};
};

struct ServiceConfig {
  CacheConfig cache;
  std::size_t default_k = 200;
  // When set, existing judgments are loaded from and new ones appended to
  // this JSONL file.
  std::optional<std::filesystem::path> judgments_path;
  // Served under /ui/ when nonempty.
  std::filesystem::path ui_dir;
};

// Request handling for the embedding, search and annotation endpoints.
// Handlers are plain functions of the request so they can be tested
// without a socket; Mount() binds them to an httplib server. Model and
// index are immutable snapshots that can be swapped while serving.
class SearchService {
 public:
  explicit SearchService(ServiceConfig config,
                         EmbeddingCache::Clock clock = std::chrono::steady_clock::now);

  void SetEmbedder(std::shared_ptr<Embedder> embedder);
  void SetIndex(std::shared_ptr<const index::VectorIndex> index);
  void LoadTasks(std::vector<eval::AnnotationTask> tasks);

  HttpResponse HandleEmbed(const std::string& body);
  HttpResponse HandleSearch(const std::string& body);
  HttpResponse HandleAnnotationNext(const std::string& annotator_id);
  HttpResponse HandleAnnotationSubmit(const std::string& body);
  HttpResponse HandleAnnotationExport() const;
  HttpResponse HandleStats() const;

  void Mount(httplib::Server& server);
  // Blocks until the server stops. Returns false when binding fails.
  bool Run(const std::string& host, int port);

  std::vector<eval::JudgedPair> judgments() const;
  const EmbeddingCache& cache() const { return cache_; }

 private:
  struct EmbedResult {
    std::vector<float> vector;
    bool cached = false;
    std::string model_id;
  };

  std::shared_ptr<Embedder> embedder() const;
  std::shared_ptr<const index::VectorIndex> index() const;
  EmbedResult EmbedQuery(Embedder& embedder, const std::string& normalized);

  ServiceConfig config_;
  EmbeddingCache cache_;

  mutable std::mutex snapshot_mu_;
  std::shared_ptr<Embedder> embedder_;
  std::shared_ptr<const index::VectorIndex> index_;

  mutable std::mutex annotation_mu_;
  bool tasks_loaded_ = false;
  std::map<std::string, eval::AnnotationTask> tasks_;  // by task_id
  std::map<std::pair<std::string, std::string>, std::string> task_by_pair_;
  std::vector<eval::JudgedPair> judgments_;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> judged_by_annotator_;
};

}  // namespace ebr::service
