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


#include <algorithm>
#include <thread>

#include "doctest.h"
#include "ebr/encoder.hpp"
#include "ebr/error.hpp"
#include "ebr/index.hpp"
#include "ebr/io.hpp"
#include "ebr/service.hpp"
#include "ebr/text.hpp"
#include "httplib.h"
#include "test_util.hpp"

namespace ebr::service {
namespace {

using testing::Product;
using testing::TempDir;

encoder::EncoderConfig SmallConfig() {
  encoder::EncoderConfig c;
  c.vocab_buckets = 512;
  c.embedding_dim = 8;
  return c;
}

std::vector<corpus::ProductRecord> Products() {
  return {Product("p1", {{"title", "Acme 55 inch OLED TV"}, {"category", "TVs > OLED"}}),
          Product("p2", {{"title", "Sonic wireless earbuds"}, {"category", "Audio > Headphones"}}),
          Product("p3", {{"title", "Volt gaming laptop"}, {"category", "Computers > Laptops"}}),
          Product("p4", {{"title", "Acme soundbar"}, {"category", "Audio > Soundbars"}})};
}

struct Fixture {
  encoder::EncoderCheckpoint ckpt = encoder::InitCheckpoint(SmallConfig(), 3, "m1");
  std::shared_ptr<LocalEmbedder> embedder = std::make_shared<LocalEmbedder>(ckpt);
  std::shared_ptr<index::VectorIndex> idx;
  SearchService service;

  explicit Fixture(ServiceConfig config = {}) : service(std::move(config)) {
    std::vector<index::IndexEntry> entries;
    for (const auto& p : Products()) {
      entries.push_back({p.sku, encoder::ToFloat(embedder->encoder().EmbedProduct(p))});
    }
    idx = index::BuildExact(std::move(entries));
    service.SetEmbedder(embedder);
    service.SetIndex(idx);
  }
};

Json Body(const HttpResponse& r) { return Json::parse(r.body); }

std::vector<eval::AnnotationTask> Tasks() {
  return {{"t000001", "oled tv", "p1", "Acme 55 inch OLED TV", "TVs > OLED"},
          {"t000002", "earbuds", "p2", "Sonic wireless earbuds", "Audio > Headphones"}};
}

TEST_SUITE("service") {

TEST_CASE("embed returns the encoder's vector and caches by normalized query") {
  Fixture f;
  auto first = f.service.HandleEmbed(R"({"query":"OLED TV"})");
  REQUIRE(first.status == 200);
  CHECK(Body(first)["cached"] == false);
  CHECK(Body(first)["model_id"] == "m1");
  const auto expected = encoder::ToFloat(f.embedder->encoder().EmbedText("oled tv"));
  CHECK(Body(first)["vector"].get<std::vector<float>>() == expected);

  auto second = f.service.HandleEmbed(R"({"query":"  oled   tv "})");
  REQUIRE(second.status == 200);
  CHECK(Body(second)["cached"] == true);
  CHECK(Body(second)["vector"].get<std::vector<float>>() == expected);
  CHECK(f.embedder->invocations() == 1);

  const auto stats = Body(f.service.HandleStats());
  CHECK(stats["cache_hits"] == 1);
  CHECK(stats["cache_misses"] == 1);
  CHECK(stats["encoder_invocations"] == 1);
  CHECK(stats["index_size"] == 4);
}

TEST_CASE("embed input errors are 400 and a missing model is 503") {
  Fixture f;
  CHECK(f.service.HandleEmbed("not json").status == 400);
  CHECK(f.service.HandleEmbed(R"([1,2])").status == 400);
  CHECK(f.service.HandleEmbed(R"({"q":"tv"})").status == 400);
  CHECK(f.service.HandleEmbed(R"({"query":7})").status == 400);
  CHECK(f.service.HandleEmbed(R"({"query":" !! "})").status == 400);
  SearchService bare{ServiceConfig{}};
  CHECK(bare.HandleEmbed(R"({"query":"tv"})").status == 503);
}

TEST_CASE("swapping the model does not serve stale vectors") {
  Fixture f;
  REQUIRE(f.service.HandleEmbed(R"({"query":"tv"})").status == 200);
  auto other = std::make_shared<LocalEmbedder>(encoder::InitCheckpoint(SmallConfig(), 99, "m2"));
  f.service.SetEmbedder(other);
  auto r = f.service.HandleEmbed(R"({"query":"tv"})");
  CHECK(Body(r)["cached"] == false);
  CHECK(Body(r)["model_id"] == "m2");
  CHECK(Body(r)["vector"].get<std::vector<float>>() ==
        encoder::ToFloat(other->encoder().EmbedText("tv")));
}

TEST_CASE("search matches a brute-force scan") {
  Fixture f;
  auto r = f.service.HandleSearch(R"({"query":"acme tv","k":3})");
  REQUIRE(r.status == 200);
  const auto results = Body(r)["results"];
  REQUIRE(results.size() == 3);

  const auto q = encoder::ToFloat(f.embedder->encoder().EmbedText("acme tv"));
  std::vector<std::pair<double, std::string>> scan;
  for (const auto& p : Products()) {
    const auto v = encoder::ToFloat(f.embedder->encoder().EmbedProduct(p));
    double dot = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) dot += static_cast<double>(q[i]) * v[i];
    scan.emplace_back(-dot, p.sku);
  }
  std::sort(scan.begin(), scan.end());
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(results[i]["sku"] == scan[i].second);
    CHECK(results[i]["score"].get<double>() == doctest::Approx(-scan[i].first).epsilon(1e-6));
  }
}

TEST_CASE("search uses the default k and validates k") {
  ServiceConfig config;
  config.default_k = 2;
  Fixture f(config);
  CHECK(Body(f.service.HandleSearch(R"({"query":"tv"})"))["results"].size() == 2);
  CHECK(Body(f.service.HandleSearch(R"({"query":"tv","k":100})"))["results"].size() == 4);
  CHECK(f.service.HandleSearch(R"({"query":"tv","k":0})").status == 400);
  CHECK(f.service.HandleSearch(R"({"query":"tv","k":-3})").status == 400);
  CHECK(f.service.HandleSearch(R"({"query":"tv","k":"5"})").status == 400);
  CHECK(f.service.HandleSearch(R"({"query":"tv","k":2.5})").status == 400);
  CHECK(f.service.HandleSearch(R"({"query":""})").status == 400);
}

TEST_CASE("search without an index is 503") {
  SearchService s{ServiceConfig{}};
  s.SetEmbedder(std::make_shared<LocalEmbedder>(encoder::InitCheckpoint(SmallConfig(), 1)));
  CHECK(s.HandleSearch(R"({"query":"tv"})").status == 503);
}

TEST_CASE("annotation flow: next, submit, export") {
  Fixture f;
  CHECK(f.service.HandleAnnotationNext("a1").status == 503);
  f.service.LoadTasks(Tasks());
  CHECK(f.service.HandleAnnotationNext("").status == 400);

  auto next = f.service.HandleAnnotationNext("a1");
  REQUIRE(next.status == 200);
  CHECK(Body(next)["task_id"] == "t000001");
  CHECK(Body(next)["progress"]["judged"] == 0);
  CHECK(Body(next)["progress"]["total"] == 2);

  CHECK(f.service.HandleAnnotationSubmit(R"({"annotator_id":"a1","task_id":"t000001","grade":"Perfect"})").status == 400);
  CHECK(f.service.HandleAnnotationSubmit(R"({"annotator_id":"a1","task_id":"t9","grade":"Good"})").status == 404);
  CHECK(f.service.HandleAnnotationSubmit(R"({"annotator_id":"a1","query":"x","sku":"p1","grade":"Good"})").status == 404);
  CHECK(f.service.HandleAnnotationSubmit(R"({"task_id":"t000001","grade":"Good"})").status == 400);
  CHECK(f.service.HandleAnnotationSubmit(R"({"annotator_id":"a1","task_id":"t000001","sku":"p2","grade":"Good"})").status == 400);
  CHECK(f.service.HandleAnnotationSubmit("{").status == 400);

  CHECK(f.service.HandleAnnotationSubmit(R"({"annotator_id":"a1","task_id":"t000001","grade":"Excellent"})").status == 200);
  next = f.service.HandleAnnotationNext("a1");
  CHECK(Body(next)["task_id"] == "t000002");
  CHECK(Body(next)["progress"]["judged"] == 1);
  // Another annotator still starts at the first task.
  CHECK(Body(f.service.HandleAnnotationNext("a2"))["task_id"] == "t000001");

  CHECK(f.service.HandleAnnotationSubmit(R"({"annotator_id":"a1","query":"earbuds","sku":"p2","grade":"Irrelevant"})").status == 200);
  CHECK(f.service.HandleAnnotationNext("a1").status == 204);

  const auto exported = f.service.HandleAnnotationExport();
  CHECK(exported.status == 200);
  CHECK(exported.content_type == "application/x-ndjson");
  CHECK(std::count(exported.body.begin(), exported.body.end(), '\n') == 2);
  const auto judgments = f.service.judgments();
  REQUIRE(judgments.size() == 2);
  CHECK(judgments[0].grade == eval::Grade::kExcellent);
  CHECK(judgments[1].grade == eval::Grade::kIrrelevant);
}

TEST_CASE("judgments persist to the configured store") {
  TempDir dir;
  ServiceConfig config;
  config.judgments_path = dir / "j.jsonl";
  {
    Fixture f(config);
    f.service.LoadTasks(Tasks());
    REQUIRE(f.service.HandleAnnotationSubmit(R"({"annotator_id":"a1","task_id":"t000002","grade":"Good"})").status == 200);
  }
  Fixture reopened(config);
  reopened.service.LoadTasks(Tasks());
  CHECK(reopened.service.judgments().size() == 1);
  CHECK(Body(reopened.service.HandleAnnotationNext("a1"))["task_id"] == "t000001");
  CHECK(eval::ImportJudgments(dir / "j.jsonl").size() == 1);
}

TEST_CASE("http round-trip, including a remote embedder") {
  TempDir ui;
  WriteFile(ui / "index.html", "<html>ebr</html>");
  ServiceConfig config;
  config.ui_dir = ui.path();
  Fixture f(config);
  f.service.LoadTasks(Tasks());

  httplib::Server server;
  f.service.Mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const std::string base = "http://127.0.0.1:" + std::to_string(port);
  httplib::Client client(base);
  auto health = client.Get("/healthz");
  REQUIRE(health);
  CHECK(health->status == 200);
  CHECK(health->body == "ok");

  auto search = client.Post("/v1/search", R"({"query":"laptop","k":1})", "application/json");
  REQUIRE(search);
  CHECK(search->status == 200);
  CHECK(Json::parse(search->body)["results"].size() == 1);

  auto bad = client.Post("/v1/search", R"({"query":"laptop","k":0})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  auto next = client.Get("/v1/annotation/next?annotator_id=a9");
  REQUIRE(next);
  CHECK(next->status == 200);

  auto page = client.Get("/ui/index.html");
  REQUIRE(page);
  CHECK(page->status == 200);
  CHECK(page->body == "<html>ebr</html>");

  {
    // A second service that delegates embedding over HTTP.
    auto remote = std::make_shared<RemoteEmbedder>(base);
    CHECK(remote->model_id() == "m1");
    SearchService front{ServiceConfig{}};
    front.SetEmbedder(remote);
    front.SetIndex(f.idx);
    auto r1 = front.HandleSearch(R"({"query":"Acme TV","k":2})");
    auto r2 = front.HandleSearch(R"({"query":"acme tv","k":2})");
    REQUIRE(r1.status == 200);
    CHECK(Body(r2)["cached"] == true);
    CHECK(remote->requests() == 1);
    CHECK(Body(r1)["results"] == Body(f.service.HandleSearch(R"({"query":"acme tv","k":2})"))["results"]);
  }

  server.stop();
  thread.join();
  CHECK_THROWS_AS(RemoteEmbedder{base}, Error);
}

}  // TEST_SUITE

}  // namespace
}  // namespace ebr::service
