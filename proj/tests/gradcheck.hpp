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

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ebr/corpus.hpp"
#include "ebr/curation.hpp"
#include "ebr/encoder.hpp"
#include "ebr/text.hpp"
#include "ebr/training.hpp"

// Central finite differences against MccelBackward on a tiny random model.
namespace ebr::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;   // entries with |grad| above the floor
  std::string worst;         // tensor[index] of the worst entry
};

struct GradCheckCase {
  encoder::EncoderCheckpoint checkpoint;
  corpus::Catalog catalog;
  std::vector<curation::TrainingPair> pairs;
  training::Stage stage = training::Stage::kQ2P;
};

inline std::string RandomWord(std::mt19937_64& rng) {
  static const std::vector<std::string> kWords = {
      "sony", "tv", "oled", "red", "laptop", "case", "pro", "mini", "usb", "cable",
      "black", "65in", "wireless", "earbuds", "gaming", "mouse", "lg", "fridge"};
  return kWords[rng() % kWords.size()];
}

inline std::string RandomText(std::mt19937_64& rng, std::size_t min_words, std::size_t max_words) {
  std::string text;
  const std::size_t n = min_words + rng() % (max_words - min_words + 1);
  for (std::size_t i = 0; i < n; ++i) text += (i ? " " : "") + RandomWord(rng);
  return text;
}

// V=32, d=4, B=4; stage alternates with the seed so both right-side paths run.
inline GradCheckCase MakeGradCheckCase(std::uint64_t seed, std::size_t vocab = 32,
                                       std::size_t dim = 4, std::size_t batch = 4) {
  std::mt19937_64 rng(seed);
  encoder::EncoderConfig config;
  config.vocab_buckets = static_cast<std::uint32_t>(vocab);
  config.embedding_dim = static_cast<std::uint32_t>(dim);
  config.ngram_orders = {3};
  config.shared_towers = seed % 3 != 0;
  GradCheckCase c;
  c.checkpoint = encoder::InitCheckpoint(config, rng());
  // Spread the projection away from identity so tanh is exercised off-linear.
  for (auto& [name, tensor] : c.checkpoint.tensors) {
    if (name.ends_with("proj_w") || name.ends_with("proj_b")) {
      std::normal_distribution<float> normal(0.0f, 0.6f);
      for (float& x : tensor.values) x += normal(rng);
    }
  }
  c.stage = seed % 2 == 0 ? training::Stage::kQ2P : training::Stage::kQ2Q;
  std::vector<corpus::ProductRecord> products;
  for (std::size_t i = 0; i < batch; ++i) {
    corpus::ProductRecord p;
    p.sku = "s" + std::to_string(i);
    p.fields["title"] = RandomText(rng, 1, 4);
    if (rng() % 2) p.fields["category"] = RandomText(rng, 1, 2) + " > " + RandomText(rng, 1, 2);
    if (rng() % 2) p.fields["description"] = RandomText(rng, 2, 6);
    products.push_back(p);
    curation::TrainingPair pair;
    pair.left = RandomText(rng, 1, 3);
    if (c.stage == training::Stage::kQ2P) {
      pair.kind = curation::PairKind::kQ2P;
      pair.right = p.fields["title"];
      pair.right_sku = p.sku;
    } else {
      pair.kind = curation::PairKind::kQ2Q;
      pair.right = RandomText(rng, 1, 3);
    }
    c.pairs.push_back(pair);
  }
  c.catalog = corpus::Catalog(std::move(products));
  return c;
}

// Independent forward pass and loss in long double. Only tokenization and
// text normalization are shared with the library.
struct OracleTower {
  std::vector<long double> embedding, proj_w, proj_b;
};

struct OracleModel {
  encoder::EncoderConfig config;
  std::vector<OracleTower> towers;  // [query, product] or one shared tower

  explicit OracleModel(const encoder::EncoderCheckpoint& ckpt) : config(ckpt.config) {
    const std::vector<std::string> prefixes =
        config.shared_towers ? std::vector<std::string>{""} : std::vector<std::string>{"qtower_", "ptower_"};
    for (const auto& prefix : prefixes) {
      OracleTower t;
      auto load = [&](const char* base, std::vector<long double>& out) {
        const auto& v = ckpt.tensors.at(prefix + base).values;
        out.assign(v.begin(), v.end());
      };
      load("token_embedding", t.embedding);
      load("proj_w", t.proj_w);
      load("proj_b", t.proj_b);
      towers.push_back(std::move(t));
    }
  }

  std::vector<long double>* Param(const std::string& name) {
    OracleTower& t = towers[name.rfind("ptower_", 0) == 0 ? 1 : 0];
    if (name.ends_with("token_embedding")) return &t.embedding;
    if (name.ends_with("proj_w")) return &t.proj_w;
    return &t.proj_b;
  }

  std::vector<long double> Text(const std::string& normalized, bool product) const {
    const OracleTower& t = towers[product && towers.size() > 1 ? 1 : 0];
    const std::size_t d = config.embedding_dim;
    auto tokens = encoder::Tokenize(normalized, config);
    if (tokens.empty()) tokens.push_back(0);
    std::vector<long double> mean(d, 0.0L);
    for (auto id : tokens) {
      for (std::size_t c = 0; c < d; ++c) mean[c] += t.embedding[id * d + c];
    }
    for (auto& x : mean) x /= static_cast<long double>(tokens.size());
    std::vector<long double> h(d);
    long double norm = 0.0L;
    for (std::size_t r = 0; r < d; ++r) {
      long double z = t.proj_b[r];
      for (std::size_t c = 0; c < d; ++c) z += t.proj_w[r * d + c] * mean[c];
      h[r] = std::tanh(z);
      norm += h[r] * h[r];
    }
    norm = std::sqrt(norm);
    for (auto& x : h) x /= norm;
    return h;
  }

  std::vector<long double> ProductVec(const corpus::ProductRecord& p) const {
    std::vector<long double> pooled(config.embedding_dim, 0.0L);
    std::size_t n = 0;
    for (const auto& field : config.product_fields) {
      const std::string* text = p.Field(field);
      if (text == nullptr) continue;
      const std::string normalized = NormalizeQuery(*text);
      if (normalized.empty()) continue;
      const auto v = Text(normalized, true);
      for (std::size_t c = 0; c < v.size(); ++c) pooled[c] += v[c];
      ++n;
    }
    long double norm = 0.0L;
    for (auto& x : pooled) {
      x /= static_cast<long double>(n);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : pooled) x /= norm;
    return pooled;
  }

  long double Loss(const GradCheckCase& c, double scale) const {
    std::vector<std::vector<long double>> left, right;
    for (const auto& pair : c.pairs) {
      left.push_back(Text(pair.left, false));
      right.push_back(c.stage == training::Stage::kQ2P ? ProductVec(c.catalog.At(*pair.right_sku))
                                                       : Text(pair.right, false));
    }
    long double total = 0.0L;
    for (std::size_t i = 0; i < left.size(); ++i) {
      long double denom = 0.0L, pos = 0.0L;
      for (std::size_t j = 0; j < right.size(); ++j) {
        long double dot = 0.0L;
        for (std::size_t k = 0; k < left[i].size(); ++k) dot += left[i][k] * right[j][k];
        const long double e = std::exp(static_cast<long double>(scale) * dot);
        denom += e;
        if (i == j) pos = e;
      }
      total += std::log(denom / pos);
    }
    return total / static_cast<long double>(left.size());
  }
};

// Compares MccelBackward with central differences of the long double
// oracle loss. Entries where both values are at most `floor` are skipped.
inline GradCheckResult RunGradCheck(const GradCheckCase& c, double scale, double h = 1e-4,
                                    double floor = 1e-8) {
  encoder::Encoder model(c.checkpoint);
  std::vector<const curation::TrainingPair*> ptrs;
  for (const auto& p : c.pairs) ptrs.push_back(&p);
  const auto fwd = training::ForwardBatch(model, ptrs, c.stage, &c.catalog);
  const training::Gradients grads = training::MccelBackward(fwd, model, scale);

  OracleModel oracle(c.checkpoint);
  GradCheckResult result;
  for (const auto& [name, tensor] : c.checkpoint.tensors) {
    const encoder::Vec analytic = grads.Dense(model.config(), name);
    std::vector<long double>& values = *oracle.Param(name);
    for (std::size_t i = 0; i < values.size(); ++i) {
      const long double saved = values[i];
      values[i] = saved + h;
      const long double plus = oracle.Loss(c, scale);
      values[i] = saved - h;
      const long double minus = oracle.Loss(c, scale);
      values[i] = saved;
      const double numeric = static_cast<double>((plus - minus) / (2.0L * h));
      const double mag = std::max(std::abs(analytic[i]), std::abs(numeric));
      if (mag <= floor) continue;
      ++result.checked;
      const double rel = std::abs(analytic[i] - numeric) / mag;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return result;
}

}  // namespace ebr::testing
