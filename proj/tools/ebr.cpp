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

// ebr: command-line driver for the offline pipeline and the HTTP service.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ebr/config.hpp"
#include "ebr/corpus.hpp"
#include "ebr/curation.hpp"
#include "ebr/encoder.hpp"
#include "ebr/error.hpp"
#include "ebr/evaluation.hpp"
#include "ebr/index.hpp"
#include "ebr/io.hpp"
#include "ebr/pipeline.hpp"
#include "ebr/service.hpp"
#include "ebr/synthetic.hpp"
#include "ebr/training.hpp"

namespace fs = std::filesystem;
using namespace ebr;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

void AddCommon(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config, "TOML config file (default: $EBR_CONFIG)");
  cmd->add_option("--seed", common.seed, "Override every RNG seed");
}

config::PipelineConfig LoadConfig(const Common& common) {
  std::string path = common.config;
  if (path.empty()) {
    if (const char* env = std::getenv("EBR_CONFIG")) path = env;
  }
  config::PipelineConfig cfg = path.empty() ? config::ParseConfig("") : config::LoadConfig(path);
  if (common.seed) cfg.ApplySeed(*common.seed);
  return cfg;
}

// Flag value if given, else the configured path.
fs::path Resolve(const std::string& flag, const config::PipelineConfig& cfg,
                 const std::string& name) {
  return flag.empty() ? cfg.Path(name) : fs::path(flag);
}

std::optional<fs::path> ResolveOptional(const std::string& flag,
                                        const config::PipelineConfig& cfg,
                                        const std::string& name) {
  if (!flag.empty()) return fs::path(flag);
  auto it = cfg.paths.find(name);
  if (it == cfg.paths.end()) return std::nullopt;
  return it->second;
}

void Log(const std::string& line) { std::fprintf(stderr, "%s\n", line.c_str()); }

std::unique_ptr<index::VectorIndex> BuildIndex(std::vector<index::IndexEntry> entries,
                                               const config::PipelineConfig& cfg) {
  if (cfg.exact_index) return index::BuildExact(std::move(entries));
  return index::BuildHnsw(std::move(entries), cfg.index);
}

eval::RetrievalRun RunModel(const fs::path& checkpoint_path, const corpus::Catalog& catalog,
                            const std::vector<std::string>& queries, std::size_t k,
                            const config::PipelineConfig& cfg) {
  const auto checkpoint = encoder::LoadCheckpoint(checkpoint_path);
  const encoder::Encoder model(checkpoint);
  const auto idx = BuildIndex(pipeline::EmbedCatalog(model, catalog), cfg);
  return pipeline::RetrieveAll(model, *idx, queries, k, checkpoint.model_id);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedding-based retrieval for long-tail product search", "ebr"};
  app.require_subcommand(1);
  Common common;

  // gen-corpus
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-corpus", "Generate the bundled synthetic catalog and logs");
  AddCommon(gen, common);
  gen->add_option("--out-dir", gen_out, "Directory for catalog/events/history JSONL")->required();
  gen->callback([&] {
    const auto cfg = LoadConfig(common);
    const auto corpus = synthetic::GenerateCorpus(cfg.corpus);
    const fs::path dir(gen_out);
    corpus::SaveCatalog(dir / "catalog.jsonl", corpus.catalog);
    corpus::SaveEvents(dir / "events.jsonl", corpus.events);
    corpus::SaveQueryHistory(dir / "history.jsonl", corpus.history);
    Log("wrote " + std::to_string(corpus.catalog.products().size()) + " products, " +
        std::to_string(corpus.events.size()) + " events, " +
        std::to_string(corpus.history.size()) + " history queries to " + dir.string());
  });

  // ingest
  std::string ing_catalog, ing_events, ing_out;
  auto* ingest = app.add_subcommand("ingest", "Validate the catalog and aggregate events");
  AddCommon(ingest, common);
  ingest->add_option("--catalog", ing_catalog);
  ingest->add_option("--events", ing_events);
  ingest->add_option("--out", ing_out, "Aggregates JSONL");
  ingest->callback([&] {
    const auto cfg = LoadConfig(common);
    const auto catalog = corpus::LoadCatalog(Resolve(ing_catalog, cfg, "catalog"));
    const auto events = corpus::LoadEvents(Resolve(ing_events, cfg, "events"));
    for (const auto& e : events) {
      if (!catalog.Find(e.sku)) throw Error(ErrorCode::kNotFound, "event references unknown sku " + e.sku);
    }
    const auto aggregates = corpus::AggregateEvents(events);
    corpus::SaveAggregates(Resolve(ing_out, cfg, "aggregates"), aggregates);
    Log("aggregated " + std::to_string(events.size()) + " events into " +
        std::to_string(aggregates.size()) + " pairs");
  });

  // synth
  std::string syn_catalog, syn_out;
  std::size_t syn_n = 0;
  auto* synth = app.add_subcommand("synth", "Generate template synthetic queries per product");
  AddCommon(synth, common);
  synth->add_option("--catalog", syn_catalog);
  synth->add_option("--out", syn_out, "Synthetic-query JSONL");
  synth->add_option("-n", syn_n, "Queries per product (default from config)");
  synth->callback([&] {
    const auto cfg = LoadConfig(common);
    const auto catalog = corpus::LoadCatalog(Resolve(syn_catalog, cfg, "catalog"));
    const std::size_t n = syn_n > 0 ? syn_n : cfg.curation.synthetic_queries_per_product;
    const auto pairs = pipeline::SynthesizeAll(catalog, n, curation::TemplateGenerator(),
                                               cfg.curation.rng_seed);
    std::vector<Json> rows;
    for (const auto& p : pairs) rows.push_back({{"sku", *p.right_sku}, {"query", p.left}});
    WriteJsonl(Resolve(syn_out, cfg, "synthetic"), rows);
    Log("wrote " + std::to_string(rows.size()) + " synthetic queries");
  });

  // curate
  std::string cur_catalog, cur_aggregates, cur_synthetic, cur_out_dir;
  auto* curate = app.add_subcommand("curate", "Build q2p/q2q training sets and the held-out split");
  AddCommon(curate, common);
  curate->add_option("--catalog", cur_catalog);
  curate->add_option("--aggregates", cur_aggregates);
  curate->add_option("--synthetic", cur_synthetic, "Imported synthetic queries (default: template generator)");
  curate->add_option("--out-dir", cur_out_dir, "Writes q2p.jsonl, q2q.jsonl, holdout.jsonl");
  curate->callback([&] {
    const auto cfg = LoadConfig(common);
    const auto catalog = corpus::LoadCatalog(Resolve(cur_catalog, cfg, "catalog"));
    const auto aggregates = corpus::LoadAggregates(Resolve(cur_aggregates, cfg, "aggregates"));
    std::vector<curation::TrainingPair> synthetics;
    if (auto path = ResolveOptional(cur_synthetic, cfg, "synthetic"); path && fs::exists(*path)) {
      synthetics = curation::ImportSyntheticQueries(*path, catalog);
    } else {
      synthetics = pipeline::SynthesizeAll(catalog, cfg.curation.synthetic_queries_per_product,
                                           curation::TemplateGenerator(), cfg.curation.rng_seed);
    }
    const auto data = pipeline::Curate(catalog, aggregates, std::move(synthetics), cfg.curation,
                                       cfg.holdout_fraction);
    const fs::path dir = cur_out_dir.empty() ? cfg.Path("q2p").parent_path() : fs::path(cur_out_dir);
    curation::SaveTrainingPairs(cur_out_dir.empty() ? cfg.Path("q2p") : dir / "q2p.jsonl", data.q2p);
    curation::SaveTrainingPairs(cur_out_dir.empty() ? cfg.Path("q2q") : dir / "q2q.jsonl", data.q2q);
    curation::SaveTrainingPairs(cur_out_dir.empty() ? cfg.Path("holdout") : dir / "holdout.jsonl",
                                data.holdout);
    Log("positives=" + std::to_string(data.positives.size()) + " q2p=" +
        std::to_string(data.q2p.size()) + " q2q=" + std::to_string(data.q2q.size()) +
        " holdout=" + std::to_string(data.holdout.size()));
  });

  // init
  std::string init_out;
  auto* init = app.add_subcommand("init", "Write a freshly initialized checkpoint");
  AddCommon(init, common);
  init->add_option("--out", init_out);
  init->callback([&] {
    const auto cfg = LoadConfig(common);
    encoder::SaveCheckpoint(encoder::InitCheckpoint(cfg.train.encoder, cfg.train.init_seed, "base"),
                            Resolve(init_out, cfg, "base"));
  });

  // pretrain
  std::string pre_catalog, pre_pairs, pre_init, pre_out;
  auto* pretrain = app.add_subcommand("pretrain", "Skip-gram pretraining of token embeddings");
  AddCommon(pretrain, common);
  pretrain->add_option("--catalog", pre_catalog);
  pretrain->add_option("--pairs", pre_pairs, "q2p pairs whose queries join the corpus");
  pretrain->add_option("--init", pre_init, "Starting checkpoint (default: fresh init)");
  pretrain->add_option("--out", pre_out);
  pretrain->callback([&] {
    const auto cfg = LoadConfig(common);
    const auto catalog = corpus::LoadCatalog(Resolve(pre_catalog, cfg, "catalog"));
    std::vector<curation::TrainingPair> pairs;
    if (auto path = ResolveOptional(pre_pairs, cfg, "q2p")) pairs = curation::LoadTrainingPairs(*path);
    const auto start = pre_init.empty()
                           ? encoder::InitCheckpoint(cfg.train.encoder, cfg.train.init_seed, "base")
                           : encoder::LoadCheckpoint(pre_init);
    auto out = training::PretrainEmbeddings(pipeline::PretrainTexts(catalog, pairs), start,
                                            cfg.train.pretrain_config);
    encoder::SaveCheckpoint(out, Resolve(pre_out, cfg, "base"));
  });

  // train
  std::string tr_stage, tr_init, tr_out, tr_data, tr_catalog, tr_log;
  auto* train = app.add_subcommand("train", "Finetune one stage (q2q or q2p)");
  AddCommon(train, common);
  train->add_option("--stage", tr_stage)->required()->check(CLI::IsMember({"q2q", "q2p"}));
  train->add_option("--init", tr_init, "Starting checkpoint")->required();
  train->add_option("--out", tr_out, "Output checkpoint")->required();
  train->add_option("--data", tr_data, "Training pairs JSONL (default: [paths].q2q or .q2p)");
  train->add_option("--catalog", tr_catalog);
  train->add_option("--log", tr_log, "Per-epoch JSONL log");
  train->callback([&] {
    const auto cfg = LoadConfig(common);
    const bool q2p = tr_stage == "q2p";
    const auto pairs = curation::LoadTrainingPairs(Resolve(tr_data, cfg, tr_stage));
    std::optional<corpus::Catalog> catalog;
    if (q2p) catalog = corpus::LoadCatalog(Resolve(tr_catalog, cfg, "catalog"));
    std::vector<Json> log_rows;
    const auto result = training::TrainStage(
        pairs, encoder::LoadCheckpoint(tr_init), q2p ? cfg.train.q2p : cfg.train.q2q,
        catalog ? &*catalog : nullptr, [&](const training::EpochLog& e) {
          log_rows.push_back(e.ToJson());
          Log(e.ToJson().dump());
        });
    encoder::SaveCheckpoint(result.checkpoint, tr_out);
    if (!tr_log.empty()) WriteJsonl(tr_log, log_rows);
  });

  // merge
  std::string mg_spec, mg_out;
  auto* merge = app.add_subcommand("merge", "Weighted sum of checkpoints");
  AddCommon(merge, common);
  merge->add_option("--spec", mg_spec, "Merge spec JSON")->required();
  merge->add_option("--out", mg_out)->required();
  merge->callback([&] {
    LoadConfig(common);
    const auto spec = training::LoadMergeSpec(mg_spec);
    std::vector<encoder::EncoderCheckpoint> checkpoints;
    checkpoints.reserve(spec.size());
    for (const auto& entry : spec) checkpoints.push_back(encoder::LoadCheckpoint(entry.path));
    std::vector<training::MergeComponent> parts;
    for (std::size_t i = 0; i < spec.size(); ++i) parts.push_back({&checkpoints[i], spec[i].weight});
    encoder::SaveCheckpoint(training::MergeCheckpoints(parts), mg_out);
  });

  // embed-products
  std::string ep_ckpt, ep_catalog, ep_out;
  auto* embed = app.add_subcommand("embed-products", "Embed every catalog product");
  AddCommon(embed, common);
  embed->add_option("--checkpoint", ep_ckpt);
  embed->add_option("--catalog", ep_catalog);
  embed->add_option("--out", ep_out, "Embeddings JSONL");
  embed->callback([&] {
    const auto cfg = LoadConfig(common);
    const encoder::Encoder model(encoder::LoadCheckpoint(Resolve(ep_ckpt, cfg, "checkpoint")));
    const auto catalog = corpus::LoadCatalog(Resolve(ep_catalog, cfg, "catalog"));
    index::SaveEmbeddings(Resolve(ep_out, cfg, "embeddings"), pipeline::EmbedCatalog(model, catalog));
  });

  // index
  std::string ix_emb, ix_out;
  bool ix_exact = false;
  auto* idx = app.add_subcommand("index", "Build a vector index from product embeddings");
  AddCommon(idx, common);
  idx->add_option("--embeddings", ix_emb);
  idx->add_option("--out", ix_out);
  idx->add_flag("--exact", ix_exact, "Brute-force index instead of HNSW");
  idx->callback([&] {
    auto cfg = LoadConfig(common);
    if (ix_exact) cfg.exact_index = true;
    const auto built = BuildIndex(index::LoadEmbeddings(Resolve(ix_emb, cfg, "embeddings")), cfg);
    index::SaveIndex(*built, Resolve(ix_out, cfg, "index"));
    Log("indexed " + std::to_string(built->size()) + " vectors");
  });

  // evalset
  std::string es_history, es_catalog, es_out;
  std::vector<std::string> es_runs, es_models;
  auto* evalset = app.add_subcommand("evalset", "Sample queries, pool runs, export annotation tasks");
  AddCommon(evalset, common);
  evalset->add_option("--history", es_history);
  evalset->add_option("--catalog", es_catalog);
  evalset->add_option("--runs", es_runs, "Run JSONL files to pool");
  evalset->add_option("--model", es_models, "Checkpoints retrieved against the catalog and pooled");
  evalset->add_option("--out", es_out, "Task JSONL");
  evalset->callback([&] {
    const auto cfg = LoadConfig(common);
    const auto history = corpus::LoadQueryHistory(Resolve(es_history, cfg, "history"));
    const auto catalog = corpus::LoadCatalog(Resolve(es_catalog, cfg, "catalog"));
    const auto queries = eval::SampleEvalQueries(history, cfg.eval.n_queries, cfg.eval.rng_seed);
    std::vector<eval::RetrievalRun> runs;
    for (const auto& path : es_runs) {
      for (auto& run : eval::LoadRuns(path)) runs.push_back(std::move(run));
    }
    for (const auto& path : es_models) runs.push_back(RunModel(path, catalog, queries, cfg.eval_k, cfg));
    if (runs.empty()) throw Error(ErrorCode::kInvalidArgument, "evalset needs --runs or --model");
    std::vector<eval::PooledCandidate> sampled;
    for (const auto& query : queries) {
      const auto pool = eval::PoolCandidates(query, runs, cfg.eval.impute_missing_rank);
      for (auto& c : eval::SamplePool(pool, cfg.eval.products_per_query, cfg.eval.rng_seed)) {
        sampled.push_back(std::move(c));
      }
    }
    const auto tasks = eval::MakeAnnotationTasks(sampled, catalog);
    eval::ExportAnnotationTasks(Resolve(es_out, cfg, "tasks"), tasks);
    Log("exported " + std::to_string(tasks.size()) + " tasks for " +
        std::to_string(queries.size()) + " queries");
  });

  // evaluate
  std::string ev_judgments, ev_catalog, ev_out;
  std::vector<std::string> ev_runs, ev_models;
  auto* evaluate = app.add_subcommand("evaluate", "Score runs against judgments with recall@25/200");
  AddCommon(evaluate, common);
  evaluate->add_option("--judgments", ev_judgments);
  evaluate->add_option("--runs", ev_runs, "Run JSONL files");
  evaluate->add_option("--model", ev_models, "Checkpoints retrieved against the catalog");
  evaluate->add_option("--catalog", ev_catalog);
  evaluate->add_option("--out", ev_out, "Report JSON (default: stdout)");
  evaluate->callback([&] {
    const auto cfg = LoadConfig(common);
    const auto judgments = eval::ImportJudgments(Resolve(ev_judgments, cfg, "judgments"));
    std::vector<eval::RetrievalRun> runs;
    for (const auto& path : ev_runs) {
      for (auto& run : eval::LoadRuns(path)) runs.push_back(std::move(run));
    }
    if (!ev_models.empty()) {
      const auto catalog = corpus::LoadCatalog(Resolve(ev_catalog, cfg, "catalog"));
      std::set<std::string> unique;
      for (const auto& j : judgments) unique.insert(j.query);
      const std::vector<std::string> queries(unique.begin(), unique.end());
      for (const auto& path : ev_models) runs.push_back(RunModel(path, catalog, queries, 200, cfg));
    }
    if (runs.empty()) throw Error(ErrorCode::kInvalidArgument, "evaluate needs --runs or --model");
    const auto report = eval::CompareModels(runs, judgments, cfg.eval.relevance_threshold,
                                            cfg.eval.capped_denominator);
    const std::string text = report.ToJson().dump(2) + "\n";
    if (ev_out.empty()) {
      std::cout << text;
    } else {
      WriteFile(ev_out, text);
    }
  });

  // serve
  std::string sv_ckpt, sv_index, sv_tasks, sv_judgments, sv_ui, sv_host, sv_embed_url;
  int sv_port = -1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  AddCommon(serve, common);
  serve->add_option("--checkpoint", sv_ckpt);
  serve->add_option("--index", sv_index);
  serve->add_option("--tasks", sv_tasks);
  serve->add_option("--judgments", sv_judgments, "Append-only judgment store");
  serve->add_option("--ui-dir", sv_ui, "Static files served under /ui/");
  serve->add_option("--embed-url", sv_embed_url, "Remote embed service for the query tower");
  serve->add_option("--host", sv_host);
  serve->add_option("--port", sv_port, "Listen port (default: $EBR_PORT, then 8080)");
  serve->callback([&] {
    const auto cfg = LoadConfig(common);
    service::ServiceConfig sc;
    sc.cache = cfg.cache;
    sc.default_k = cfg.default_k;
    sc.judgments_path = ResolveOptional(sv_judgments, cfg, "judgments");
    if (auto ui = ResolveOptional(sv_ui, cfg, "ui")) sc.ui_dir = *ui;
    service::SearchService svc(sc);

    const std::string embed_url = sv_embed_url.empty() ? cfg.embed_url.value_or("") : sv_embed_url;
    if (!embed_url.empty()) {
      svc.SetEmbedder(std::make_shared<service::RemoteEmbedder>(embed_url));
    } else if (auto path = ResolveOptional(sv_ckpt, cfg, "checkpoint")) {
      svc.SetEmbedder(std::make_shared<service::LocalEmbedder>(encoder::LoadCheckpoint(*path)));
    }
    if (auto path = ResolveOptional(sv_index, cfg, "index")) {
      svc.SetIndex(std::shared_ptr<const index::VectorIndex>(index::LoadIndex(*path)));
    }
    if (auto path = ResolveOptional(sv_tasks, cfg, "tasks")) {
      svc.LoadTasks(eval::LoadAnnotationTasks(*path));
    }
    int port = sv_port;
    if (port < 0) {
      const char* env = std::getenv("EBR_PORT");
      port = env != nullptr ? std::stoi(env) : cfg.port;
    }
    const std::string host = sv_host.empty() ? cfg.host : sv_host;
    Log("listening on " + host + ":" + std::to_string(port));
    if (!svc.Run(host, port)) {
      throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
    }
  });

  if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
    std::fprintf(stderr, "ebr: error: unknown subcommand '%s'\n%s", argv[1], app.help().c_str());
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string usage = app.help();
    for (const auto* sub : app.get_subcommands()) usage = sub->help();
    std::fprintf(stderr, "ebr: error: %s\n%s", e.what(), usage.c_str());
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "ebr: error [%s]: %s\n", std::string(ErrorCodeName(e.code())).c_str(),
                 e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ebr: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
