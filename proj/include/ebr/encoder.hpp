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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ebr/corpus.hpp"
#include "ebr/io.hpp"

namespace ebr::encoder {

struct EncoderConfig {
  std::uint32_t vocab_buckets = 1u << 16;
  std::uint32_t embedding_dim = 64;
  std::vector<std::uint32_t> ngram_orders = {3};
  std::vector<std::string> product_fields = {"title", "category", "description"};
  bool shared_towers = true;

  void Validate() const;
  Json ToJson() const;
  static EncoderConfig FromJson(const Json& json);

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<float> values;  // row-major

  std::size_t ElementCount() const;
  friend bool operator==(const Tensor&, const Tensor&) = default;
};

struct EncoderCheckpoint {
  EncoderConfig config;
  std::string model_id;
  std::map<std::string, Tensor> tensors;

  // Checks names, shapes and finiteness against `config`.
  void Validate() const;
  const Tensor& At(const std::string& name) const;
};

enum class Tower : std::uint8_t { kQuery = 0, kProduct = 1 };

// "token_embedding", "proj_w" or "proj_b", prefixed with "qtower_" or
// "ptower_" when the towers do not share weights.
std::string TensorName(const EncoderConfig& config, Tower tower, std::string_view base);
// Names and shapes every checkpoint for `config` must carry.
std::map<std::string, std::vector<std::uint32_t>> ExpectedShapes(const EncoderConfig& config);

// Hashed token ids for normalized text. For each word, in order: the word
// unigram, then every n-gram (for each configured order) of "#word#". Each
// id is FNV-1a-64 of the token bytes modulo vocab_buckets. Duplicates are
// kept, so a token counts once per occurrence in the mean.
std::vector<std::uint32_t> Tokenize(std::string_view text, const EncoderConfig& config);

// Random initial weights: embeddings uniform in [-0.5, 0.5], projection
// the identity plus small uniform noise, zero bias.
EncoderCheckpoint InitCheckpoint(const EncoderConfig& config, std::uint64_t seed,
                                 std::string model_id = "init");

// Binary layout (all integers little-endian): "EBRC", u32 version (1),
// u32 header length, header JSON (config plus "model_id"), u32 tensor
// count, then per tensor: u16 name length, name, u8 rank, u32 dims,
// binary32 values in row-major order.
std::string SerializeCheckpoint(const EncoderCheckpoint& checkpoint);
EncoderCheckpoint ParseCheckpoint(std::string_view bytes);
void SaveCheckpoint(const EncoderCheckpoint& checkpoint, const std::filesystem::path& path);
EncoderCheckpoint LoadCheckpoint(const std::filesystem::path& path);

using Vec = std::vector<double>;

double Dot(const Vec& a, const Vec& b);
double Norm(const Vec& v);
std::vector<float> ToFloat(const Vec& v);

struct TowerParams {
  Vec embedding;  // vocab_buckets x dim
  Vec proj_w;     // dim x dim
  Vec proj_b;     // dim
};

// Activations of one text forward pass, kept for backpropagation.
struct TextActivation {
  std::vector<std::uint32_t> tokens;
  Vec mean;    // mean token embedding
  Vec hidden;  // tanh(W mean + b)
  double norm = 0.0;
  Vec output;  // hidden / norm
};

struct ProductActivation {
  std::vector<TextActivation> fields;
  Vec pooled;  // mean of field outputs
  double norm = 0.0;
  Vec output;
};

// Double-precision working copy of a checkpoint. Forward passes are const
// and safe to run concurrently; training mutates the parameters through
// tower() and owns the instance exclusively.
class Encoder {
 public:
  explicit Encoder(const EncoderCheckpoint& checkpoint);

  const EncoderConfig& config() const { return config_; }
  const std::string& model_id() const { return model_id_; }
  void set_model_id(std::string id) { model_id_ = std::move(id); }

  TowerParams& tower(Tower t) { return towers_[Index(t)]; }
  const TowerParams& tower(Tower t) const { return towers_[Index(t)]; }
  std::size_t tower_count() const { return towers_.size(); }

  // mean -> tanh projection -> unit normalization. Empty text embeds the
  // reserved bucket 0. A zero hidden vector maps to the first basis vector.
  TextActivation ForwardText(std::string_view normalized_text, Tower t = Tower::kQuery) const;
  // Mean-pools embed_text over the configured product fields present on
  // the product, then renormalizes. Throws kInvalidArgument naming the
  // sku when no configured field has text.
  ProductActivation ForwardProduct(const corpus::ProductRecord& product) const;

  Vec EmbedText(std::string_view normalized_text, Tower t = Tower::kQuery) const {
    return ForwardText(normalized_text, t).output;
  }
  Vec EmbedProduct(const corpus::ProductRecord& product) const {
    return ForwardProduct(product).output;
  }

  // Rounds parameters to binary32.
  EncoderCheckpoint ToCheckpoint() const;

 private:
  std::size_t Index(Tower t) const {
    return config_.shared_towers ? 0 : static_cast<std::size_t>(t);
  }

  EncoderConfig config_;
  std::string model_id_;
  std::vector<TowerParams> towers_;
};

}  // namespace ebr::encoder
