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

#include "ebr/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "ebr/error.hpp"
#include "ebr/random.hpp"
#include "ebr/text.hpp"

namespace ebr::training {
namespace {

using encoder::Encoder;
using encoder::EncoderCheckpoint;
using encoder::ProductActivation;
using encoder::TextActivation;
using encoder::Tower;
using encoder::TowerParams;

std::size_t TowerIndex(const encoder::EncoderConfig& config, Tower tower) {
  return config.shared_towers ? 0 : static_cast<std::size_t>(tower);
}

TowerGradient ZeroTowerGradient(std::size_t d) {
  TowerGradient g;
  g.proj_w.assign(d * d, 0.0);
  g.proj_b.assign(d, 0.0);
  return g;
}

// Chains dL/d(output) back through normalization, tanh, projection and the
// token mean into `grad`.
void BackwardText(const TextActivation& act, const Vec& grad_output, const TowerParams& params,
                  TowerGradient& grad) {
  if (act.norm <= 0.0) return;  // constant output branch
  const std::size_t d = act.output.size();
  const double y_dot_g = encoder::Dot(act.output, grad_output);
  Vec dz(d);
  for (std::size_t r = 0; r < d; ++r) {
    const double dh = (grad_output[r] - act.output[r] * y_dot_g) / act.norm;
    dz[r] = dh * (1.0 - act.hidden[r] * act.hidden[r]);
  }
  Vec dv(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    grad.proj_b[r] += dz[r];
    double* gw = &grad.proj_w[r * d];
    const double* w = &params.proj_w[r * d];
    for (std::size_t c = 0; c < d; ++c) {
      gw[c] += dz[r] * act.mean[c];
      dv[c] += w[c] * dz[r];
    }
  }
  const double inv = 1.0 / static_cast<double>(act.tokens.size());
  for (std::uint32_t id : act.tokens) {
    Vec& row = grad.embedding_rows[id];
    if (row.empty()) row.assign(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) row[c] += dv[c] * inv;
  }
}

void BackwardProduct(const ProductActivation& act, const Vec& grad_output,
                     const TowerParams& params, TowerGradient& grad) {
  if (act.norm <= 0.0) return;
  const std::size_t d = act.output.size();
  const double y_dot_g = encoder::Dot(act.output, grad_output);
  const double field_share = 1.0 / static_cast<double>(act.fields.size());
  Vec d_field(d);
  for (std::size_t c = 0; c < d; ++c) {
    d_field[c] = (grad_output[c] - act.output[c] * y_dot_g) / act.norm * field_share;
  }
  for (const auto& field : act.fields) BackwardText(field, d_field, params, grad);
}

void CheckUnit(const Vec& v, const char* side, std::size_t i) {
  if (std::abs(encoder::Norm(v) - 1.0) > 1e-3) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(side) + " vector " + std::to_string(i) + " is not unit norm");
  }
}

// Row-wise log-sum-exp of the scaled logits; also returns the logits.
std::vector<Vec> Logits(std::span<const Vec> left, std::span<const Vec> right, double scale) {
  if (left.size() != right.size()) {
    throw Error(ErrorCode::kInvalidArgument, "left and right batch sizes differ");
  }
  if (left.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  for (std::size_t i = 0; i < left.size(); ++i) {
    if (left[i].size() != right[0].size() || right[i].size() != right[0].size()) {
      throw Error(ErrorCode::kInvalidArgument, "vector dimensions differ within the batch");
    }
    CheckUnit(left[i], "left", i);
    CheckUnit(right[i], "right", i);
  }
  const std::size_t b = left.size();
  std::vector<Vec> logits(b, Vec(b));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) logits[i][j] = scale * encoder::Dot(left[i], right[j]);
  }
  return logits;
}

double LogSumExp(const Vec& row) {
  const double m = *std::max_element(row.begin(), row.end());
  double s = 0.0;
  for (double x : row) s += std::exp(x - m);
  return m + std::log(s);
}

// -log softmax(row)[i]. When row[i] is the maximum the loss is
// log1p(sum over j != i of exp(row[j] - row[i])), which keeps full relative
// precision for losses far below machine epsilon.
double CrossEntropyAt(const Vec& row, std::size_t i) {
  const double m = *std::max_element(row.begin(), row.end());
  if (row[i] < m) return LogSumExp(row) - row[i];
  double rest = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j != i) rest += std::exp(row[j] - row[i]);
  }
  return std::log1p(rest);
}

struct AdamMoments {
  Vec m, v;
  void Ensure(std::size_t n) {
    if (m.empty()) {
      m.assign(n, 0.0);
      v.assign(n, 0.0);
    }
  }
};

struct TowerMoments {
  AdamMoments embedding, proj_w, proj_b;
};

class ParameterUpdater {
 public:
  ParameterUpdater(const TrainingConfig& config, std::size_t towers)
      : config_(config), moments_(towers) {}

  void Apply(Encoder& model, const Gradients& grads) {
    ++step_;
    const std::size_t d = model.config().embedding_dim;
    for (std::size_t t = 0; t < grads.towers.size(); ++t) {
      TowerParams& p = model.tower(static_cast<Tower>(t));
      const TowerGradient& g = grads.towers[t];
      TowerMoments& mom = moments_[t];
      for (const auto& [row, values] : g.embedding_rows) {
        const std::size_t offset = static_cast<std::size_t>(row) * d;
        Update(p.embedding, mom.embedding, offset, values);
      }
      Update(p.proj_w, mom.proj_w, 0, g.proj_w);
      Update(p.proj_b, mom.proj_b, 0, g.proj_b);
    }
  }

 private:
  void Update(Vec& params, AdamMoments& mom, std::size_t offset, const Vec& grad) {
    const double lr = config_.learning_rate;
    if (config_.optimizer == Optimizer::kSgd) {
      for (std::size_t i = 0; i < grad.size(); ++i) params[offset + i] -= lr * grad[i];
      return;
    }
    // Lazy Adam: moments advance only for entries present in the gradient;
    // bias correction uses the global step.
    mom.Ensure(params.size());
    const double b1 = config_.adam_beta1;
    const double b2 = config_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t i = 0; i < grad.size(); ++i) {
      double& m = mom.m[offset + i];
      double& v = mom.v[offset + i];
      m = b1 * m + (1.0 - b1) * grad[i];
      v = b2 * v + (1.0 - b2) * grad[i] * grad[i];
      params[offset + i] -= lr * (m / c1) / (std::sqrt(v / c2) + config_.adam_epsilon);
    }
  }

  const TrainingConfig& config_;
  std::vector<TowerMoments> moments_;
  std::uint64_t step_ = 0;
};

const std::string& RightKey(const curation::TrainingPair& pair) {
  return pair.right_sku ? *pair.right_sku : pair.right;
}

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::string_view StageName(Stage stage) { return stage == Stage::kQ2Q ? "q2q" : "q2p"; }

void TrainingConfig::Validate() const {
  if (batch_size < 2) throw Error(ErrorCode::kInvalidConfig, "batch_size must be >= 2");
  if (!(scale > 0.0)) throw Error(ErrorCode::kInvalidConfig, "scale must be > 0");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidConfig, "learning_rate must be > 0");
  if (optimizer == Optimizer::kAdam &&
      !(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1 && adam_epsilon > 0)) {
    throw Error(ErrorCode::kInvalidConfig, "adam hyperparameters out of range");
  }
}

BatchLossReport MccelLoss(std::span<const Vec> left, std::span<const Vec> right, double scale) {
  const auto logits = Logits(left, right, scale);
  BatchLossReport report;
  report.per_item_losses.resize(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    report.per_item_losses[i] = CrossEntropyAt(logits[i], i);
    total += report.per_item_losses[i];
  }
  report.mean_loss = total / static_cast<double>(logits.size());
  return report;
}

std::vector<Vec> MccelLogitGradient(std::span<const Vec> left, std::span<const Vec> right,
                                    double scale) {
  auto g = Logits(left, right, scale);
  const double inv_b = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double lse = LogSumExp(g[i]);
    for (std::size_t j = 0; j < g.size(); ++j) {
      g[i][j] = (std::exp(g[i][j] - lse) - (i == j ? 1.0 : 0.0)) * inv_b;
    }
  }
  return g;
}

Vec Gradients::Dense(const encoder::EncoderConfig& config, const std::string& tensor_name) const {
  const std::size_t d = config.embedding_dim;
  for (Tower t : {Tower::kQuery, Tower::kProduct}) {
    const std::size_t index = TowerIndex(config, t);
    if (index >= towers.size()) continue;
    const TowerGradient& g = towers[index];
    if (tensor_name == encoder::TensorName(config, t, "proj_w")) return g.proj_w;
    if (tensor_name == encoder::TensorName(config, t, "proj_b")) return g.proj_b;
    if (tensor_name == encoder::TensorName(config, t, "token_embedding")) {
      Vec dense(static_cast<std::size_t>(config.vocab_buckets) * d, 0.0);
      for (const auto& [row, values] : g.embedding_rows) {
        std::copy(values.begin(), values.end(), dense.begin() + static_cast<std::ptrdiff_t>(row * d));
      }
      return dense;
    }
  }
  throw Error(ErrorCode::kNotFound, "no gradient for tensor " + tensor_name);
}

std::vector<Vec> BatchForward::LeftOutputs() const {
  std::vector<Vec> out;
  out.reserve(left.size());
  for (const auto& a : left) out.push_back(a.output);
  return out;
}

std::vector<Vec> BatchForward::RightOutputs() const {
  std::vector<Vec> out;
  if (stage == Stage::kQ2Q) {
    for (const auto& a : right_text) out.push_back(a.output);
  } else {
    for (const auto& a : right_product) out.push_back(a.output);
  }
  return out;
}

BatchForward ForwardBatch(const Encoder& model,
                          std::span<const curation::TrainingPair* const> batch, Stage stage,
                          const corpus::Catalog* catalog) {
  BatchForward out;
  out.stage = stage;
  for (const curation::TrainingPair* pair : batch) {
    const bool q2p = pair->kind == curation::PairKind::kQ2P;
    if (q2p != (stage == Stage::kQ2P)) {
      throw Error(ErrorCode::kInvalidArgument, "pair kind does not match training stage");
    }
    out.left.push_back(model.ForwardText(pair->left, Tower::kQuery));
    if (stage == Stage::kQ2Q) {
      out.right_text.push_back(model.ForwardText(pair->right, Tower::kQuery));
    } else {
      if (catalog == nullptr || !pair->right_sku) {
        throw Error(ErrorCode::kInvalidArgument, "q2p training needs a catalog and right_sku");
      }
      out.right_product.push_back(model.ForwardProduct(catalog->At(*pair->right_sku)));
    }
  }
  return out;
}

Gradients MccelBackward(const BatchForward& batch, const Encoder& model, double scale) {
  const std::size_t b = batch.size();
  const std::size_t right_count =
      batch.stage == Stage::kQ2Q ? batch.right_text.size() : batch.right_product.size();
  if (b == 0 || right_count != b) {
    throw Error(ErrorCode::kInvalidArgument, "batch has no cached activations");
  }
  const std::size_t d = model.config().embedding_dim;
  const auto left = batch.LeftOutputs();
  const auto right = batch.RightOutputs();
  const auto g_logits = MccelLogitGradient(left, right, scale);

  Gradients grads;
  for (std::size_t t = 0; t < model.tower_count(); ++t) grads.towers.push_back(ZeroTowerGradient(d));
  TowerGradient& query_grad = grads.towers[TowerIndex(model.config(), Tower::kQuery)];
  TowerGradient& product_grad = grads.towers[TowerIndex(model.config(), Tower::kProduct)];

  for (std::size_t i = 0; i < b; ++i) {
    Vec g_left(d, 0.0);
    Vec g_right(d, 0.0);
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t c = 0; c < d; ++c) {
        g_left[c] += scale * g_logits[i][j] * right[j][c];
        g_right[c] += scale * g_logits[j][i] * left[j][c];
      }
    }
    BackwardText(batch.left[i], g_left, model.tower(Tower::kQuery), query_grad);
    if (batch.stage == Stage::kQ2Q) {
      BackwardText(batch.right_text[i], g_right, model.tower(Tower::kQuery), query_grad);
    } else {
      BackwardProduct(batch.right_product[i], g_right, model.tower(Tower::kProduct), product_grad);
    }
  }
  return grads;
}

Json EpochLog::ToJson() const {
  return Json{{"stage", StageName(stage)}, {"epoch", epoch}, {"mean_loss", mean_loss}, {"pairs", pairs}};
}

std::string StagedModelId(const std::string& init_id, Stage stage) {
  if (stage == Stage::kQ2P && init_id == "q2q") return "q2q_q2p";
  return std::string(StageName(stage));
}

TrainResult TrainStage(const std::vector<curation::TrainingPair>& dataset,
                       const EncoderCheckpoint& init, const TrainingConfig& config,
                       const corpus::Catalog* catalog,
                       const std::function<void(const EpochLog&)>& on_epoch) {
  config.Validate();
  if (dataset.size() < config.batch_size) {
    throw Error(ErrorCode::kInvalidArgument,
                "dataset has " + std::to_string(dataset.size()) +
                    " pairs, fewer than one batch of " + std::to_string(config.batch_size));
  }
  const auto expected_kind =
      config.stage == Stage::kQ2P ? curation::PairKind::kQ2P : curation::PairKind::kQ2Q;
  for (const auto& pair : dataset) {
    if (pair.kind != expected_kind) {
      throw Error(ErrorCode::kInvalidArgument, "dataset contains a " +
                                                   std::string(curation::PairKindName(pair.kind)) +
                                                   " pair in a " +
                                                   std::string(StageName(config.stage)) + " stage");
    }
    if (expected_kind == curation::PairKind::kQ2P) {
      if (catalog == nullptr || !pair.right_sku) {
        throw Error(ErrorCode::kInvalidArgument, "q2p training needs a catalog and right_sku");
      }
      catalog->At(*pair.right_sku);
    }
  }

  TrainResult result;
  Encoder model(init);
  ParameterUpdater updater(config, model.tower_count());
  Rng rng(SplitMix64(config.rng_seed));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t items = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const curation::TrainingPair*> batch;
      std::set<std::string> rights;
      for (std::size_t k = start; k < end; ++k) {
        const auto& pair = dataset[order[k]];
        if (config.dedup_right_in_batch && !rights.insert(RightKey(pair)).second) continue;
        batch.push_back(&pair);
      }
      if (batch.size() < 2) continue;  // a lone item has no negatives and zero gradient

      BatchForward fwd = ForwardBatch(model, batch, config.stage, catalog);
      const auto left = fwd.LeftOutputs();
      const auto right = fwd.RightOutputs();
      BatchLossReport report = MccelLoss(left, right, config.scale);
      if (!std::isfinite(report.mean_loss)) {
        throw Error(ErrorCode::kNonFinite, "non-finite loss in stage " +
                                               std::string(StageName(config.stage)) + " epoch " +
                                               std::to_string(epoch) + " batch " +
                                               std::to_string(batch_index));
      }
      loss_sum += report.mean_loss * static_cast<double>(batch.size());
      items += batch.size();
      updater.Apply(model, MccelBackward(fwd, model, config.scale));
    }
    EpochLog entry{config.stage, epoch, items ? loss_sum / static_cast<double>(items) : 0.0, items};
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }

  result.checkpoint = model.ToCheckpoint();
  result.checkpoint.model_id = StagedModelId(init.model_id, config.stage);
  return result;
}

void PretrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidConfig, "pretrain learning_rate must be > 0");
  if (window < 1) throw Error(ErrorCode::kInvalidConfig, "pretrain window must be >= 1");
}

EncoderCheckpoint PretrainEmbeddings(const std::vector<std::string>& corpus_texts,
                                     const EncoderCheckpoint& init, const PretrainConfig& config) {
  if (corpus_texts.empty()) throw Error(ErrorCode::kInvalidArgument, "pretraining corpus is empty");
  config.Validate();
  if (config.epochs == 0) return init;
  Encoder model(init);
  const auto& enc_config = model.config();
  const std::size_t d = enc_config.embedding_dim;

  // Per text: token groups per word (unigram id first).
  std::vector<std::vector<std::vector<std::uint32_t>>> texts;
  std::map<std::uint32_t, double> unigram_counts;
  for (const auto& raw : corpus_texts) {
    std::vector<std::vector<std::uint32_t>> groups;
    for (const auto& word : SplitWords(NormalizeQuery(raw))) {
      groups.push_back(encoder::Tokenize(word, enc_config));
      unigram_counts[groups.back().front()] += 1.0;
    }
    if (groups.size() >= 2) texts.push_back(std::move(groups));
  }
  if (texts.empty()) return init;

  std::vector<std::uint32_t> noise_ids;
  std::vector<double> noise_cdf;
  double total = 0.0;
  for (const auto& [id, count] : unigram_counts) {
    total += std::pow(count, 0.75);
    noise_ids.push_back(id);
    noise_cdf.push_back(total);
  }

  for (std::size_t t = 0; t < model.tower_count(); ++t) {
    Vec& table = model.tower(static_cast<Tower>(t)).embedding;
    Rng rng(SplitMix64(config.rng_seed));
    std::vector<std::size_t> order(texts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Vec center(d), center_grad(d);

    auto row = [&](std::uint32_t id) { return &table[static_cast<std::size_t>(id) * d]; };

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
      Shuffle(order.begin(), order.end(), rng);
      for (std::size_t text_index : order) {
        const auto& groups = texts[text_index];
        for (std::size_t i = 0; i < groups.size(); ++i) {
          const std::size_t lo = i >= config.window ? i - config.window : 0;
          const std::size_t hi = std::min(groups.size() - 1, i + config.window);
          for (std::size_t j = lo; j <= hi; ++j) {
            if (j == i) continue;
            std::fill(center.begin(), center.end(), 0.0);
            for (std::uint32_t id : groups[i]) {
              const double* r = row(id);
              for (std::size_t c = 0; c < d; ++c) center[c] += r[c];
            }
            const double inv = 1.0 / static_cast<double>(groups[i].size());
            for (double& x : center) x *= inv;
            std::fill(center_grad.begin(), center_grad.end(), 0.0);

            const std::uint32_t positive = groups[j].front();
            for (std::size_t k = 0; k <= config.negatives; ++k) {
              std::uint32_t target = positive;
              double label = 1.0;
              if (k > 0) {
                const double u = UniformUnit(rng) * total;
                auto pos = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u) - noise_cdf.begin();
                target = noise_ids[std::min<std::size_t>(static_cast<std::size_t>(pos), noise_ids.size() - 1)];
                if (target == positive) continue;
                label = 0.0;
              }
              double* out = row(target);
              double score = 0.0;
              for (std::size_t c = 0; c < d; ++c) score += center[c] * out[c];
              const double g = config.learning_rate * (label - Sigmoid(score));
              for (std::size_t c = 0; c < d; ++c) {
                center_grad[c] += g * out[c];
                out[c] += g * center[c];
              }
            }
            for (std::uint32_t id : groups[i]) {
              double* r = row(id);
              for (std::size_t c = 0; c < d; ++c) r[c] += center_grad[c] * inv;
            }
          }
        }
      }
    }
  }

  EncoderCheckpoint out = model.ToCheckpoint();
  out.model_id = init.model_id;
  return out;
}

EncoderCheckpoint MergeCheckpoints(std::span<const MergeComponent> components) {
  if (components.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "a merge needs at least two components");
  }
  double weight_sum = 0.0;
  for (const auto& c : components) {
    if (c.checkpoint == nullptr) throw Error(ErrorCode::kInvalidArgument, "null merge component");
    if (!(c.weight >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "merge weights must be >= 0");
    weight_sum += c.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                "merge weights sum to " + std::to_string(weight_sum) + ", not 1");
  }
  const EncoderCheckpoint& first = *components.front().checkpoint;
  for (const auto& c : components) {
    const EncoderCheckpoint& other = *c.checkpoint;
    if (!(other.config == first.config)) {
      throw Error(ErrorCode::kShapeMismatch, "merge components have different encoder configs");
    }
    if (other.tensors.size() != first.tensors.size()) {
      throw Error(ErrorCode::kShapeMismatch, "merge components have different tensor sets");
    }
    for (const auto& [name, tensor] : first.tensors) {
      auto it = other.tensors.find(name);
      if (it == other.tensors.end()) {
        throw Error(ErrorCode::kShapeMismatch, "tensor " + name + " missing from a merge component");
      }
      if (it->second.shape != tensor.shape) {
        throw Error(ErrorCode::kShapeMismatch, "tensor " + name + " has mismatched shapes");
      }
    }
  }

  EncoderCheckpoint merged;
  merged.config = first.config;
  merged.model_id = "merged";
  for (const auto& [name, tensor] : first.tensors) {
    std::vector<double> acc(tensor.values.size(), 0.0);
    for (const auto& c : components) {
      const auto& values = c.checkpoint->tensors.at(name).values;
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += c.weight * static_cast<double>(values[i]);
    }
    merged.tensors.emplace(name, encoder::Tensor{tensor.shape, std::vector<float>(acc.begin(), acc.end())});
  }
  return merged;
}

std::vector<MergeSpecEntry> LoadMergeSpec(const std::filesystem::path& path) {
  Json spec = Json::parse(ReadFile(path), nullptr, false);
  if (spec.is_discarded() || !spec.contains("components") || !spec["components"].is_array()) {
    throw Error(ErrorCode::kParse, path.string() + ": expected {\"components\": [...]}");
  }
  std::vector<MergeSpecEntry> entries;
  for (const auto& c : spec["components"]) {
    if (!c.contains("path") || !c["path"].is_string() || !c.contains("weight") ||
        !c["weight"].is_number()) {
      throw Error(ErrorCode::kParse, path.string() + ": component needs path and weight");
    }
    std::filesystem::path p = c["path"].get<std::string>();
    if (p.is_relative()) p = path.parent_path() / p;
    entries.push_back({p, c["weight"].get<double>()});
  }
  return entries;
}

}  // namespace ebr::training
