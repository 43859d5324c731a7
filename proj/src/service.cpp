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

#include "ebr/service.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "ebr/error.hpp"
#include "ebr/text.hpp"
#include "httplib.h"

namespace ebr::service {
namespace {

HttpResponse JsonResponse(int status, const Json& body) {
  return {status, body.dump(), "application/json"};
}

HttpResponse ErrorResponse(int status, const std::string& message) {
  return JsonResponse(status, Json{{"error", message}});
}

std::optional<Json> ParseObject(const std::string& body) {
  Json parsed = Json::parse(body, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) return std::nullopt;
  return parsed;
}

std::optional<std::string> StringField(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

Json TaskJson(const eval::AnnotationTask& t) {
  return Json{{"task_id", t.task_id},
              {"query", t.query},
              {"sku", t.sku},
              {"title", t.title},
              {"category", t.category}};
}

void Reply(httplib::Response& res, const HttpResponse& r) {
  res.status = r.status;
  if (r.status != 204) res.set_content(r.body, r.content_type);
}

}  // namespace

std::vector<float> LocalEmbedder::Embed(const std::string& normalized_query) {
  invocations_.fetch_add(1);
  return encoder::ToFloat(encoder_.EmbedText(normalized_query, encoder::Tower::kQuery));
}

RemoteEmbedder::RemoteEmbedder(std::string base_url) : base_url_(std::move(base_url)) {
  httplib::Client client(base_url_);
  auto res = client.Get("/v1/stats");
  if (!res || res->status != 200) {
    throw Error(ErrorCode::kIo, "embedding service at " + base_url_ + " is unreachable");
  }
  auto stats = ParseObject(res->body);
  if (!stats || !StringField(*stats, "model_id")) {
    throw Error(ErrorCode::kFormat, "embedding service returned malformed stats");
  }
  model_id_ = *StringField(*stats, "model_id");
}

std::vector<float> RemoteEmbedder::Embed(const std::string& normalized_query) {
  requests_.fetch_add(1);
  httplib::Client client(base_url_);
  auto res = client.Post("/v1/embed", Json{{"query", normalized_query}}.dump(), "application/json");
  if (!res || res->status != 200) {
    throw Error(ErrorCode::kIo, "embedding request to " + base_url_ + " failed");
  }
  auto body = ParseObject(res->body);
  if (!body || !body->contains("vector") || !(*body)["vector"].is_array()) {
    throw Error(ErrorCode::kFormat, "embedding service returned a malformed response");
  }
  return (*body)["vector"].get<std::vector<float>>();
}

SearchService::SearchService(ServiceConfig config, EmbeddingCache::Clock clock)
    : config_(std::move(config)), cache_(config_.cache, std::move(clock)) {
  if (config_.default_k < 1) throw Error(ErrorCode::kInvalidConfig, "default_k must be >= 1");
  if (config_.judgments_path && std::filesystem::exists(*config_.judgments_path)) {
    for (auto& j : eval::ImportJudgments(*config_.judgments_path)) {
      judged_by_annotator_[j.annotator_id].insert({j.query, j.sku});
      judgments_.push_back(std::move(j));
    }
  }
}

void SearchService::SetEmbedder(std::shared_ptr<Embedder> embedder) {
  std::lock_guard<std::mutex> lock(snapshot_mu_);
  embedder_ = std::move(embedder);
}

void SearchService::SetIndex(std::shared_ptr<const index::VectorIndex> index) {
  std::lock_guard<std::mutex> lock(snapshot_mu_);
  index_ = std::move(index);
}

std::shared_ptr<Embedder> SearchService::embedder() const {
  std::lock_guard<std::mutex> lock(snapshot_mu_);
  return embedder_;
}

std::shared_ptr<const index::VectorIndex> SearchService::index() const {
  std::lock_guard<std::mutex> lock(snapshot_mu_);
  return index_;
}

void SearchService::LoadTasks(std::vector<eval::AnnotationTask> tasks) {
  std::lock_guard<std::mutex> lock(annotation_mu_);
  tasks_.clear();
  task_by_pair_.clear();
  for (auto& t : tasks) {
    task_by_pair_[{t.query, t.sku}] = t.task_id;
    const std::string id = t.task_id;
    tasks_.emplace(id, std::move(t));
  }
  tasks_loaded_ = true;
}

SearchService::EmbedResult SearchService::EmbedQuery(Embedder& embedder,
                                                     const std::string& normalized) {
  EmbedResult result;
  result.model_id = embedder.model_id();
  const std::string key = EmbeddingCache::Key(normalized, result.model_id);
  if (auto hit = cache_.Get(key)) {
    result.vector = std::move(*hit);
    result.cached = true;
    return result;
  }
  result.vector = embedder.Embed(normalized);
  cache_.Put(key, result.vector);
  return result;
}

HttpResponse SearchService::HandleEmbed(const std::string& body) {
  auto request = ParseObject(body);
  if (!request) return ErrorResponse(400, "body must be a JSON object");
  auto query = StringField(*request, "query");
  if (!query) return ErrorResponse(400, "missing string field 'query'");
  const std::string normalized = NormalizeQuery(*query);
  if (normalized.empty()) return ErrorResponse(400, "query is empty after normalization");
  auto model = embedder();
  if (!model) return ErrorResponse(503, "no model loaded");
  try {
    EmbedResult r = EmbedQuery(*model, normalized);
    return JsonResponse(200, Json{{"vector", r.vector}, {"cached", r.cached}, {"model_id", r.model_id}});
  } catch (const std::exception& e) {
    return ErrorResponse(502, e.what());
  }
}

HttpResponse SearchService::HandleSearch(const std::string& body) {
  auto request = ParseObject(body);
  if (!request) return ErrorResponse(400, "body must be a JSON object");
  auto query = StringField(*request, "query");
  if (!query) return ErrorResponse(400, "missing string field 'query'");
  std::size_t k = config_.default_k;
  if (auto it = request->find("k"); it != request->end()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 1) {
      return ErrorResponse(400, "k must be an integer >= 1");
    }
    k = it->get<std::size_t>();
  }
  const std::string normalized = NormalizeQuery(*query);
  if (normalized.empty()) return ErrorResponse(400, "query is empty after normalization");
  auto idx = index();
  if (!idx) return ErrorResponse(503, "no index loaded");
  auto model = embedder();
  if (!model) return ErrorResponse(503, "no model loaded");
  try {
    EmbedResult r = EmbedQuery(*model, normalized);
    Json results = Json::array();
    for (const auto& hit : idx->Search(r.vector, k)) {
      results.push_back(Json{{"sku", hit.sku}, {"score", hit.score}});
    }
    return JsonResponse(200, Json{{"results", results}, {"cached", r.cached}, {"model_id", r.model_id}});
  } catch (const Error& e) {
    return ErrorResponse(e.code() == ErrorCode::kInvalidArgument ? 400 : 500, e.what());
  } catch (const std::exception& e) {
    return ErrorResponse(502, e.what());
  }
}

HttpResponse SearchService::HandleAnnotationNext(const std::string& annotator_id) {
  if (annotator_id.empty()) return ErrorResponse(400, "missing annotator_id");
  std::lock_guard<std::mutex> lock(annotation_mu_);
  if (!tasks_loaded_) return ErrorResponse(503, "no task file loaded");
  const auto& judged = judged_by_annotator_[annotator_id];
  std::size_t done = 0;
  const eval::AnnotationTask* next = nullptr;
  for (const auto& [id, task] : tasks_) {
    if (judged.contains({task.query, task.sku})) {
      ++done;
    } else if (next == nullptr) {
      next = &task;
    }
  }
  if (next == nullptr) return {204, "", "application/json"};
  Json body = TaskJson(*next);
  body["progress"] = Json{{"judged", done}, {"total", tasks_.size()}};
  return JsonResponse(200, body);
}

HttpResponse SearchService::HandleAnnotationSubmit(const std::string& body) {
  auto request = ParseObject(body);
  if (!request) return ErrorResponse(400, "body must be a JSON object");
  auto annotator = StringField(*request, "annotator_id");
  auto grade_name = StringField(*request, "grade");
  if (!annotator || annotator->empty()) return ErrorResponse(400, "missing annotator_id");
  if (!grade_name) return ErrorResponse(400, "missing grade");
  auto grade = eval::ParseGrade(*grade_name);
  if (!grade) return ErrorResponse(400, "unknown grade '" + *grade_name + "'");

  std::lock_guard<std::mutex> lock(annotation_mu_);
  if (!tasks_loaded_) return ErrorResponse(503, "no task file loaded");
  const eval::AnnotationTask* task = nullptr;
  if (auto task_id = StringField(*request, "task_id")) {
    auto it = tasks_.find(*task_id);
    if (it == tasks_.end()) return ErrorResponse(404, "unknown task_id " + *task_id);
    task = &it->second;
  } else {
    auto query = StringField(*request, "query");
    auto sku = StringField(*request, "sku");
    if (!query || !sku) return ErrorResponse(400, "need task_id or query and sku");
    auto it = task_by_pair_.find({*query, *sku});
    if (it == task_by_pair_.end()) return ErrorResponse(404, "no task for this query and sku");
    task = &tasks_.at(it->second);
  }
  if (auto query = StringField(*request, "query"); query && *query != task->query) {
    return ErrorResponse(400, "query does not match the task");
  }
  if (auto sku = StringField(*request, "sku"); sku && *sku != task->sku) {
    return ErrorResponse(400, "sku does not match the task");
  }

  eval::JudgedPair j{task->query, task->sku, *grade, *annotator,
                     static_cast<std::int64_t>(std::time(nullptr))};
  if (config_.judgments_path) {
    std::ofstream out(*config_.judgments_path, std::ios::app);
    out << eval::JudgmentToJson(j).dump() << '\n';
    if (!out) return ErrorResponse(500, "cannot append to the judgment store");
  }
  judged_by_annotator_[j.annotator_id].insert({j.query, j.sku});
  judgments_.push_back(j);
  return JsonResponse(200, Json{{"status", "ok"}, {"task_id", task->task_id}});
}

std::vector<eval::JudgedPair> SearchService::judgments() const {
  std::lock_guard<std::mutex> lock(annotation_mu_);
  return eval::DedupJudgments(judgments_);
}

HttpResponse SearchService::HandleAnnotationExport() const {
  std::string body;
  for (const auto& j : judgments()) {
    body += eval::JudgmentToJson(j).dump();
    body += '\n';
  }
  return {200, body, "application/x-ndjson"};
}

HttpResponse SearchService::HandleStats() const {
  const auto stats = cache_.stats();
  auto model = embedder();
  auto idx = index();
  Json body{{"cache_hits", stats.hits},
            {"cache_misses", stats.misses},
            {"cache_size", stats.size},
            {"cache_evictions", stats.evictions},
            {"index_size", idx ? idx->size() : 0},
            {"model_id", model ? model->model_id() : ""}};
  if (auto* local = dynamic_cast<LocalEmbedder*>(model.get())) {
    body["encoder_invocations"] = local->invocations();
  }
  return JsonResponse(200, body);
}

void SearchService::Mount(httplib::Server& server) {
  server.Post("/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
    Reply(res, HandleEmbed(req.body));
  });
  server.Post("/v1/search", [this](const httplib::Request& req, httplib::Response& res) {
    Reply(res, HandleSearch(req.body));
  });
  server.Get("/v1/annotation/next", [this](const httplib::Request& req, httplib::Response& res) {
    Reply(res, HandleAnnotationNext(req.get_param_value("annotator_id")));
  });
  server.Post("/v1/annotation/judgments", [this](const httplib::Request& req, httplib::Response& res) {
    Reply(res, HandleAnnotationSubmit(req.body));
  });
  server.Get("/v1/annotation/export", [this](const httplib::Request&, httplib::Response& res) {
    Reply(res, HandleAnnotationExport());
  });
  server.Get("/v1/stats", [this](const httplib::Request&, httplib::Response& res) {
    Reply(res, HandleStats());
  });
  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });
  if (!config_.ui_dir.empty()) server.set_mount_point("/ui", config_.ui_dir.string());
  server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    }
    res.status = 500;
    res.set_content(Json{{"error", message}}.dump(), "application/json");
  });
}

bool SearchService::Run(const std::string& host, int port) {
  httplib::Server server;
  Mount(server);
  return server.listen(host, port);
}

}  // namespace ebr::service
