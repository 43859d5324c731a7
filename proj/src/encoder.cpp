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

#include "ebr/encoder.hpp"

#include <cmath>

#include "ebr/error.hpp"
#include "ebr/random.hpp"
#include "ebr/text.hpp"

namespace ebr::encoder {
namespace {

constexpr char kMagic[4] = {'E', 'B', 'R', 'C'};
constexpr std::uint32_t kVersion = 1;

constexpr std::string_view kBaseNames[] = {"token_embedding", "proj_w", "proj_b"};

std::string Prefix(const EncoderConfig& config, Tower tower) {
  if (config.shared_towers) return "";
  return tower == Tower::kQuery ? "qtower_" : "ptower_";
}

std::vector<Tower> Towers(const EncoderConfig& config) {
  if (config.shared_towers) return {Tower::kQuery};
  return {Tower::kQuery, Tower::kProduct};
}

Vec ToDouble(const std::vector<float>& v) { return Vec(v.begin(), v.end()); }

}  // namespace

void EncoderConfig::Validate() const {
  if (vocab_buckets < 2) throw Error(ErrorCode::kInvalidConfig, "vocab_buckets must be >= 2");
  if (embedding_dim < 2) throw Error(ErrorCode::kInvalidConfig, "embedding_dim must be >= 2");
  if (product_fields.empty()) throw Error(ErrorCode::kInvalidConfig, "product_fields is empty");
  for (auto n : ngram_orders) {
    if (n < 1) throw Error(ErrorCode::kInvalidConfig, "ngram orders must be >= 1");
  }
}

Json EncoderConfig::ToJson() const {
  return Json{{"vocab_buckets", vocab_buckets},
              {"embedding_dim", embedding_dim},
              {"ngram_orders", ngram_orders},
              {"product_fields", product_fields},
              {"shared_towers", shared_towers}};
}

EncoderConfig EncoderConfig::FromJson(const Json& json) {
  EncoderConfig config;
  try {
    config.vocab_buckets = json.at("vocab_buckets").get<std::uint32_t>();
    config.embedding_dim = json.at("embedding_dim").get<std::uint32_t>();
    config.ngram_orders = json.at("ngram_orders").get<std::vector<std::uint32_t>>();
    config.product_fields = json.at("product_fields").get<std::vector<std::string>>();
    config.shared_towers = json.at("shared_towers").get<bool>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bad encoder config: ") + e.what());
  }
  config.Validate();
  return config;
}

std::size_t Tensor::ElementCount() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string TensorName(const EncoderConfig& config, Tower tower, std::string_view base) {
  return Prefix(config, tower) + std::string(base);
}

std::map<std::string, std::vector<std::uint32_t>> ExpectedShapes(const EncoderConfig& config) {
  const std::uint32_t v = config.vocab_buckets;
  const std::uint32_t d = config.embedding_dim;
  std::map<std::string, std::vector<std::uint32_t>> shapes;
  for (Tower t : Towers(config)) {
    shapes[TensorName(config, t, "token_embedding")] = {v, d};
    shapes[TensorName(config, t, "proj_w")] = {d, d};
    shapes[TensorName(config, t, "proj_b")] = {d};
  }
  return shapes;
}

void EncoderCheckpoint::Validate() const {
  config.Validate();
  const auto expected = ExpectedShapes(config);
  for (const auto& [name, shape] : expected) {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint is missing tensor " + name);
    }
    if (it->second.shape != shape || it->second.values.size() != it->second.ElementCount()) {
      throw Error(ErrorCode::kShapeMismatch, "tensor " + name + " does not match the config shape");
    }
  }
  for (const auto& [name, tensor] : tensors) {
    if (!expected.contains(name)) {
      throw Error(ErrorCode::kShapeMismatch, "unexpected tensor " + name);
    }
    for (float x : tensor.values) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kNonFinite, "tensor " + name + " has non-finite values");
    }
  }
}

const Tensor& EncoderCheckpoint::At(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw Error(ErrorCode::kNotFound, "no tensor " + name);
  return it->second;
}

std::vector<std::uint32_t> Tokenize(std::string_view text, const EncoderConfig& config) {
  std::vector<std::uint32_t> ids;
  const std::uint64_t buckets = config.vocab_buckets;
  for (const std::string& word : SplitWords(text)) {
    ids.push_back(static_cast<std::uint32_t>(Fnv1a64(word) % buckets));
    const std::string padded = "#" + word + "#";
    for (std::uint32_t n : config.ngram_orders) {
      for (std::size_t i = 0; i + n <= padded.size(); ++i) {
        ids.push_back(static_cast<std::uint32_t>(
            Fnv1a64(std::string_view(padded).substr(i, n)) % buckets));
      }
    }
  }
  return ids;
}

EncoderCheckpoint InitCheckpoint(const EncoderConfig& config, std::uint64_t seed,
                                 std::string model_id) {
  config.Validate();
  EncoderCheckpoint ckpt;
  ckpt.config = config;
  ckpt.model_id = std::move(model_id);
  Rng rng(SplitMix64(seed));
  const std::uint32_t d = config.embedding_dim;
  const double noise = 0.1 / std::sqrt(static_cast<double>(d));
  for (const auto& [name, shape] : ExpectedShapes(config)) {
    Tensor t;
    t.shape = shape;
    t.values.assign(t.ElementCount(), 0.0f);
    if (name.ends_with("token_embedding")) {
      for (float& x : t.values) x = static_cast<float>(UniformUnit(rng) - 0.5);
    } else if (name.ends_with("proj_w")) {
      for (std::uint32_t r = 0; r < d; ++r) {
        for (std::uint32_t c = 0; c < d; ++c) {
          double w = (r == c ? 1.0 : 0.0) + noise * (2.0 * UniformUnit(rng) - 1.0);
          t.values[r * d + c] = static_cast<float>(w);
        }
      }
    }
    ckpt.tensors.emplace(name, std::move(t));
  }
  return ckpt;
}

std::string SerializeCheckpoint(const EncoderCheckpoint& checkpoint) {
  checkpoint.Validate();
  BinaryWriter w;
  w.Bytes(std::string_view(kMagic, 4));
  w.U32(kVersion);
  Json header = checkpoint.config.ToJson();
  header["model_id"] = checkpoint.model_id;
  const std::string header_text = header.dump();
  w.U32(static_cast<std::uint32_t>(header_text.size()));
  w.Bytes(header_text);
  w.U32(static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const auto& [name, tensor] : checkpoint.tensors) {
    w.U16(static_cast<std::uint16_t>(name.size()));
    w.Bytes(name);
    w.U8(static_cast<std::uint8_t>(tensor.shape.size()));
    for (auto dim : tensor.shape) w.U32(dim);
    for (float x : tensor.values) w.F32(x);
  }
  return w.data();
}

EncoderCheckpoint ParseCheckpoint(std::string_view bytes) {
  BinaryReader r(bytes);
  if (r.Bytes(4) != std::string_view(kMagic, 4)) {
    throw Error(ErrorCode::kFormat, "not an encoder checkpoint (bad magic)");
  }
  const std::uint32_t version = r.U32();
  if (version != kVersion) {
    throw Error(ErrorCode::kUnsupportedVersion,
                "unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t header_len = r.U32();
  Json header = Json::parse(r.Bytes(header_len), nullptr, false);
  if (header.is_discarded() || !header.is_object()) {
    throw Error(ErrorCode::kFormat, "checkpoint header is not a JSON object");
  }
  EncoderCheckpoint ckpt;
  ckpt.config = EncoderConfig::FromJson(header);
  ckpt.model_id = header.value("model_id", std::string());
  const std::uint32_t count = r.U32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name(r.Bytes(r.U16()));
    Tensor t;
    const std::uint8_t rank = r.U8();
    for (std::uint8_t k = 0; k < rank; ++k) t.shape.push_back(r.U32());
    const std::size_t n = t.ElementCount();
    if (r.remaining() / 4 < n) throw Error(ErrorCode::kFormat, "checkpoint truncated in tensor " + name);
    t.values.resize(n);
    for (float& x : t.values) x = r.F32();
    if (!ckpt.tensors.emplace(name, std::move(t)).second) {
      throw Error(ErrorCode::kFormat, "duplicate tensor " + name);
    }
  }
  if (!r.AtEnd()) throw Error(ErrorCode::kFormat, "trailing bytes after checkpoint");
  ckpt.Validate();
  return ckpt;
}

void SaveCheckpoint(const EncoderCheckpoint& checkpoint, const std::filesystem::path& path) {
  WriteFile(path, SerializeCheckpoint(checkpoint));
}

EncoderCheckpoint LoadCheckpoint(const std::filesystem::path& path) {
  return ParseCheckpoint(ReadFile(path));
}

double Dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double Norm(const Vec& v) { return std::sqrt(Dot(v, v)); }

std::vector<float> ToFloat(const Vec& v) { return {v.begin(), v.end()}; }

Encoder::Encoder(const EncoderCheckpoint& checkpoint)
    : config_(checkpoint.config), model_id_(checkpoint.model_id) {
  checkpoint.Validate();
  for (Tower t : Towers(config_)) {
    TowerParams p;
    p.embedding = ToDouble(checkpoint.At(TensorName(config_, t, "token_embedding")).values);
    p.proj_w = ToDouble(checkpoint.At(TensorName(config_, t, "proj_w")).values);
    p.proj_b = ToDouble(checkpoint.At(TensorName(config_, t, "proj_b")).values);
    towers_.push_back(std::move(p));
  }
}

TextActivation Encoder::ForwardText(std::string_view normalized_text, Tower t) const {
  const TowerParams& p = tower(t);
  const std::size_t d = config_.embedding_dim;
  TextActivation act;
  act.tokens = Tokenize(normalized_text, config_);
  if (act.tokens.empty()) act.tokens.push_back(0);

  act.mean.assign(d, 0.0);
  for (std::uint32_t id : act.tokens) {
    const double* row = &p.embedding[static_cast<std::size_t>(id) * d];
    for (std::size_t c = 0; c < d; ++c) act.mean[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(act.tokens.size());
  for (double& x : act.mean) x *= inv;

  act.hidden.resize(d);
  for (std::size_t r = 0; r < d; ++r) {
    double z = p.proj_b[r];
    const double* w = &p.proj_w[r * d];
    for (std::size_t c = 0; c < d; ++c) z += w[c] * act.mean[c];
    act.hidden[r] = std::tanh(z);
  }
  act.norm = Norm(act.hidden);
  act.output.assign(d, 0.0);
  if (act.norm > 0.0) {
    for (std::size_t r = 0; r < d; ++r) act.output[r] = act.hidden[r] / act.norm;
  } else {
    act.output[0] = 1.0;
  }
  return act;
}

ProductActivation Encoder::ForwardProduct(const corpus::ProductRecord& product) const {
  ProductActivation act;
  const std::size_t d = config_.embedding_dim;
  for (const std::string& field : config_.product_fields) {
    const std::string* text = product.Field(field);
    if (text == nullptr) continue;
    std::string normalized = NormalizeQuery(*text);
    if (normalized.empty()) continue;
    act.fields.push_back(ForwardText(normalized, Tower::kProduct));
  }
  if (act.fields.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "product " + product.sku + " has none of the configured product fields");
  }
  act.pooled.assign(d, 0.0);
  for (const auto& f : act.fields) {
    for (std::size_t c = 0; c < d; ++c) act.pooled[c] += f.output[c];
  }
  const double inv = 1.0 / static_cast<double>(act.fields.size());
  for (double& x : act.pooled) x *= inv;
  act.norm = Norm(act.pooled);
  act.output.assign(d, 0.0);
  if (act.norm > 0.0) {
    for (std::size_t c = 0; c < d; ++c) act.output[c] = act.pooled[c] / act.norm;
  } else {
    act.output[0] = 1.0;
  }
  return act;
}

EncoderCheckpoint Encoder::ToCheckpoint() const {
  EncoderCheckpoint ckpt;
  ckpt.config = config_;
  ckpt.model_id = model_id_;
  const auto shapes = ExpectedShapes(config_);
  for (Tower t : Towers(config_)) {
    const TowerParams& p = tower(t);
    const std::pair<std::string_view, const Vec*> parts[] = {
        {kBaseNames[0], &p.embedding}, {kBaseNames[1], &p.proj_w}, {kBaseNames[2], &p.proj_b}};
    for (const auto& [base, values] : parts) {
      std::string name = TensorName(config_, t, base);
      ckpt.tensors.emplace(name, Tensor{shapes.at(name), ToFloat(*values)});
    }
  }
  return ckpt;
}

}  // namespace ebr::encoder
