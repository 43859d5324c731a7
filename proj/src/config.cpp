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

#include "ebr/config.hpp"

#include <set>
#include <sstream>
#include <vector>

#include "ebr/error.hpp"
#include "ebr/io.hpp"
#include "toml.hpp"

namespace ebr::config {
namespace {

// Typed reads from one TOML table that reject unknown keys and wrong types.
class Section {
 public:
  Section(const toml::table* table, std::string name) : table_(table), name_(std::move(name)) {}

  bool present() const { return table_ != nullptr; }

  template <typename T>
  void Read(const std::string& key, T& out) {
    seen_.insert(key);
    if (table_ == nullptr) return;
    const toml::node* node = table_->get(key);
    if (node == nullptr) return;
    out = Convert<T>(*node, key);
  }

  // Keys this reader does not consume on purpose (sub-tables).
  void Allow(const std::string& key) { seen_.insert(key); }

  void RejectUnknown() const {
    if (table_ == nullptr) return;
    for (const auto& [key, node] : *table_) {
      if (!seen_.contains(std::string(key.str()))) {
        throw Error(ErrorCode::kInvalidConfig, "unknown key " + Qualified(std::string(key.str())));
      }
    }
  }

 private:
  std::string Qualified(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  [[noreturn]] void Fail(const std::string& key, const char* expected) const {
    throw Error(ErrorCode::kInvalidConfig, Qualified(key) + " must be " + expected);
  }

  template <typename T>
  T Convert(const toml::node& node, const std::string& key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node.value_exact<bool>()) return *v;
      Fail(key, "a boolean");
    } else if constexpr (std::is_same_v<T, double>) {
      if (auto v = node.value<double>()) return *v;
      Fail(key, "a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node.value_exact<std::string>()) return *v;
      Fail(key, "a string");
    } else if constexpr (std::is_integral_v<T>) {
      auto v = node.value_exact<std::int64_t>();
      if (!v) Fail(key, "an integer");
      if (std::is_unsigned_v<T> && *v < 0) Fail(key, "non-negative");
      return static_cast<T>(*v);
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      const auto* arr = node.as_array();
      if (arr == nullptr) Fail(key, "an array of strings");
      T out;
      for (const auto& item : *arr) out.push_back(Convert<std::string>(item, key));
      return out;
    } else if constexpr (std::is_same_v<T, std::vector<std::uint32_t>>) {
      const auto* arr = node.as_array();
      if (arr == nullptr) Fail(key, "an array of integers");
      T out;
      for (const auto& item : *arr) out.push_back(Convert<std::uint32_t>(item, key));
      return out;
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      const auto* arr = node.as_array();
      if (arr == nullptr) Fail(key, "an array of numbers");
      T out;
      for (const auto& item : *arr) out.push_back(Convert<double>(item, key));
      return out;
    }
  }

  const toml::table* table_;
  std::string name_;
  std::set<std::string> seen_;
};

const toml::table* Sub(const toml::table* parent, const std::string& key,
                       const std::string& qualified) {
  if (parent == nullptr) return nullptr;
  const toml::node* node = parent->get(key);
  if (node == nullptr) return nullptr;
  if (!node->is_table()) throw Error(ErrorCode::kInvalidConfig, qualified + " must be a table");
  return node->as_table();
}

void ReadTraining(Section& s, training::TrainingConfig& c) {
  s.Read("batch_size", c.batch_size);
  s.Read("scale", c.scale);
  s.Read("learning_rate", c.learning_rate);
  s.Read("epochs", c.epochs);
  std::string optimizer = c.optimizer == training::Optimizer::kAdam ? "adam" : "sgd";
  s.Read("optimizer", optimizer);
  if (optimizer == "adam") {
    c.optimizer = training::Optimizer::kAdam;
  } else if (optimizer == "sgd") {
    c.optimizer = training::Optimizer::kSgd;
  } else {
    throw Error(ErrorCode::kInvalidConfig, "training optimizer must be \"sgd\" or \"adam\"");
  }
  s.Read("adam_beta1", c.adam_beta1);
  s.Read("adam_beta2", c.adam_beta2);
  s.Read("adam_epsilon", c.adam_epsilon);
  s.Read("rng_seed", c.rng_seed);
  s.Read("dedup_right_in_batch", c.dedup_right_in_batch);
}

}  // namespace

std::filesystem::path PipelineConfig::Path(const std::string& name) const {
  auto it = paths.find(name);
  if (it == paths.end()) {
    throw Error(ErrorCode::kInvalidConfig,
                "no path for '" + name + "': pass --" + name + " or set [paths]." + name);
  }
  return it->second;
}

void PipelineConfig::ApplySeed(std::uint64_t s) {
  seed = s;
  corpus.seed = s;
  curation.rng_seed = s;
  train.init_seed = s;
  train.pretrain_config.rng_seed = s;
  train.q2q.rng_seed = s;
  train.q2p.rng_seed = s;
  index.rng_seed = s;
  eval.rng_seed = s;
}

void PipelineConfig::Validate() const {
  curation.Validate();
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "curation.holdout_fraction must be in [0, 1)");
  }
  train.encoder.Validate();
  train.pretrain_config.Validate();
  train.q2q.Validate();
  train.q2p.Validate();
  index.Validate();
  eval.Validate();
  if (eval_k < 1) throw Error(ErrorCode::kInvalidConfig, "eval.run_depth must be >= 1");
  cache.Validate();
  if (default_k < 1) throw Error(ErrorCode::kInvalidConfig, "service.default_k must be >= 1");
  if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidConfig, "service.port out of range");
}

PipelineConfig ParseConfig(std::string_view text, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error at line " << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::kInvalidConfig, msg.str());
  }
  PipelineConfig c;
  c.train.q2q.stage = training::Stage::kQ2Q;
  c.train.q2p.stage = training::Stage::kQ2P;

  Section top(&root, "");
  std::optional<std::int64_t> seed;
  if (const toml::node* node = root.get("seed")) {
    auto v = node->value_exact<std::int64_t>();
    if (!v || *v < 0) throw Error(ErrorCode::kInvalidConfig, "seed must be a non-negative integer");
    seed = *v;
  }
  top.Allow("seed");
  for (const char* name : {"corpus", "curation", "encoder", "pretrain", "training", "merge",
                           "index", "eval", "cache", "service", "paths"}) {
    top.Allow(name);
  }
  top.RejectUnknown();

  Section corpus(Sub(&root, "corpus", "corpus"), "corpus");
  corpus.Read("products", c.corpus.products);
  corpus.Read("sessions", c.corpus.sessions);
  corpus.Read("visitors", c.corpus.visitors);
  corpus.Read("noise_rate", c.corpus.noise_rate);
  corpus.Read("popularity_skew", c.corpus.popularity_skew);
  corpus.Read("seed", c.corpus.seed);
  corpus.RejectUnknown();

  Section cur(Sub(&root, "curation", "curation"), "curation");
  cur.Read("min_unique_visitors", c.curation.min_unique_visitors);
  cur.Read("per_category_cap", c.curation.per_category_cap);
  cur.Read("synthetic_queries_per_product", c.curation.synthetic_queries_per_product);
  cur.Read("q2q_max_pairs_per_product", c.curation.q2q_max_pairs_per_product);
  cur.Read("rng_seed", c.curation.rng_seed);
  cur.Read("holdout_fraction", c.holdout_fraction);
  cur.RejectUnknown();

  Section enc(Sub(&root, "encoder", "encoder"), "encoder");
  enc.Read("vocab_buckets", c.train.encoder.vocab_buckets);
  enc.Read("embedding_dim", c.train.encoder.embedding_dim);
  enc.Read("ngram_orders", c.train.encoder.ngram_orders);
  enc.Read("product_fields", c.train.encoder.product_fields);
  enc.Read("shared_towers", c.train.encoder.shared_towers);
  enc.Read("init_seed", c.train.init_seed);
  enc.RejectUnknown();

  Section pre(Sub(&root, "pretrain", "pretrain"), "pretrain");
  pre.Read("enabled", c.train.pretrain);
  pre.Read("epochs", c.train.pretrain_config.epochs);
  pre.Read("learning_rate", c.train.pretrain_config.learning_rate);
  pre.Read("window", c.train.pretrain_config.window);
  pre.Read("negatives", c.train.pretrain_config.negatives);
  pre.Read("rng_seed", c.train.pretrain_config.rng_seed);
  pre.RejectUnknown();

  const toml::table* train_table = Sub(&root, "training", "training");
  Section shared(train_table, "training");
  training::TrainingConfig common;
  ReadTraining(shared, common);
  shared.Allow("q2q");
  shared.Allow("q2p");
  shared.RejectUnknown();
  c.train.q2q = common;
  c.train.q2p = common;
  c.train.q2q.stage = training::Stage::kQ2Q;
  c.train.q2p.stage = training::Stage::kQ2P;
  Section q2q(Sub(train_table, "q2q", "training.q2q"), "training.q2q");
  ReadTraining(q2q, c.train.q2q);
  q2q.RejectUnknown();
  Section q2p(Sub(train_table, "q2p", "training.q2p"), "training.q2p");
  ReadTraining(q2p, c.train.q2p);
  q2p.RejectUnknown();

  Section merge(Sub(&root, "merge", "merge"), "merge");
  std::vector<double> weights(c.train.merge_weights.begin(), c.train.merge_weights.end());
  merge.Read("weights", weights);
  merge.RejectUnknown();
  if (weights.size() != 3) {
    throw Error(ErrorCode::kInvalidConfig, "merge.weights must list 3 weights (q2q, q2p, q2q_q2p)");
  }
  std::copy(weights.begin(), weights.end(), c.train.merge_weights.begin());

  Section idx(Sub(&root, "index", "index"), "index");
  std::string kind = "hnsw";
  idx.Read("kind", kind);
  if (kind != "hnsw" && kind != "exact") {
    throw Error(ErrorCode::kInvalidConfig, "index.kind must be \"hnsw\" or \"exact\"");
  }
  c.exact_index = kind == "exact";
  idx.Read("m", c.index.m);
  idx.Read("ef_construction", c.index.ef_construction);
  idx.Read("ef_search", c.index.ef_search);
  idx.Read("rng_seed", c.index.rng_seed);
  idx.RejectUnknown();

  Section ev(Sub(&root, "eval", "eval"), "eval");
  ev.Read("n_queries", c.eval.n_queries);
  ev.Read("products_per_query", c.eval.products_per_query);
  std::string threshold(eval::GradeName(c.eval.relevance_threshold));
  ev.Read("relevance_threshold", threshold);
  auto grade = eval::ParseGrade(threshold);
  if (!grade) throw Error(ErrorCode::kInvalidConfig, "eval.relevance_threshold is not a grade: " + threshold);
  c.eval.relevance_threshold = *grade;
  ev.Read("impute_missing_rank", c.eval.impute_missing_rank);
  ev.Read("capped_denominator", c.eval.capped_denominator);
  ev.Read("rng_seed", c.eval.rng_seed);
  ev.Read("run_depth", c.eval_k);
  ev.RejectUnknown();

  Section cache(Sub(&root, "cache", "cache"), "cache");
  cache.Read("capacity", c.cache.capacity);
  cache.Read("ttl_seconds", c.cache.ttl_seconds);
  cache.RejectUnknown();

  Section svc(Sub(&root, "service", "service"), "service");
  svc.Read("host", c.host);
  svc.Read("port", c.port);
  svc.Read("default_k", c.default_k);
  std::string embed_url;
  svc.Read("embed_url", embed_url);
  if (!embed_url.empty()) c.embed_url = embed_url;
  svc.RejectUnknown();

  if (const toml::table* paths = Sub(&root, "paths", "paths")) {
    for (const auto& [key, node] : *paths) {
      auto v = node.value_exact<std::string>();
      if (!v) throw Error(ErrorCode::kInvalidConfig, "paths." + std::string(key.str()) + " must be a string");
      std::filesystem::path p(*v);
      c.paths[std::string(key.str())] = p.is_absolute() ? p : base_dir / p;
    }
  }

  if (seed) c.ApplySeed(static_cast<std::uint64_t>(*seed));
  c.Validate();
  return c;
}

PipelineConfig LoadConfig(const std::filesystem::path& path) {
  return ParseConfig(ReadFile(path), path.parent_path().empty() ? "." : path.parent_path());
}

}  // namespace ebr::config
