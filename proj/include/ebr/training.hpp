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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ebr/corpus.hpp"
#include "ebr/curation.hpp"
#include "ebr/encoder.hpp"

namespace ebr::training {

using encoder::Vec;

enum class Optimizer : std::uint8_t { kSgd, kAdam };
enum class Stage : std::uint8_t { kQ2Q, kQ2P };

std::string_view StageName(Stage stage);

struct TrainingConfig {
  std::size_t batch_size = 32;
  double scale = 20.0;
  double learning_rate = 0.05;
  std::size_t epochs = 1;
  Optimizer optimizer = Optimizer::kSgd;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t rng_seed = 0;
  Stage stage = Stage::kQ2P;
  // Drops later batch items whose right side repeats an earlier one, so
  // no in-batch negative is a copy of the positive.
  bool dedup_right_in_batch = false;

  void Validate() const;
};

struct BatchLossReport {
  double mean_loss = 0.0;
  std::vector<double> per_item_losses;
};

// Scaled multi-class cross entropy with in-batch negatives: logits
// s * <left_i, right_j>, target class i for row i. Throws on length
// mismatch or vectors whose norm is off by more than 1e-3.
BatchLossReport MccelLoss(std::span<const Vec> left, std::span<const Vec> right, double scale);

// d mean_loss / d logits, i.e. (softmax(row i) - onehot(i)) / B.
std::vector<Vec> MccelLogitGradient(std::span<const Vec> left, std::span<const Vec> right,
                                    double scale);

// Gradient for one tower. Embedding rows are sparse: only rows touched by
// the batch appear.
struct TowerGradient {
  std::map<std::uint32_t, Vec> embedding_rows;
  Vec proj_w;
  Vec proj_b;
};

struct Gradients {
  std::vector<TowerGradient> towers;  // indexed like Encoder towers

  // Dense view of the gradient for a checkpoint tensor name.
  Vec Dense(const encoder::EncoderConfig& config, const std::string& tensor_name) const;
};

// Forward activations of a batch. Left sides are queries; right sides are
// queries (q2q) or products (q2p).
struct BatchForward {
  Stage stage = Stage::kQ2P;
  std::vector<encoder::TextActivation> left;
  std::vector<encoder::TextActivation> right_text;
  std::vector<encoder::ProductActivation> right_product;

  std::size_t size() const { return left.size(); }
  std::vector<Vec> LeftOutputs() const;
  std::vector<Vec> RightOutputs() const;
};

BatchForward ForwardBatch(const encoder::Encoder& model,
                          std::span<const curation::TrainingPair* const> batch, Stage stage,
                          const corpus::Catalog* catalog);

// Exact gradient of the batch mean loss with respect to every parameter.
// Throws kInvalidArgument when the batch carries no cached activations.
Gradients MccelBackward(const BatchForward& batch, const encoder::Encoder& model, double scale);

struct EpochLog {
  Stage stage = Stage::kQ2P;
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  std::size_t pairs = 0;

  Json ToJson() const;
};

struct TrainResult {
  encoder::EncoderCheckpoint checkpoint;
  std::vector<EpochLog> log;
};

// Model id after running `stage` from a checkpoint labelled `init_id`:
// the stage name, or "q2q_q2p" for q2p training on a q2q checkpoint.
std::string StagedModelId(const std::string& init_id, Stage stage);

// Runs config.epochs passes of seeded shuffled minibatch updates. Single
// threaded and bit-reproducible for a fixed seed.
TrainResult TrainStage(const std::vector<curation::TrainingPair>& dataset,
                       const encoder::EncoderCheckpoint& init, const TrainingConfig& config,
                       const corpus::Catalog* catalog,
                       const std::function<void(const EpochLog&)>& on_epoch = nullptr);

struct PretrainConfig {
  std::size_t epochs = 1;
  double learning_rate = 0.025;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::uint64_t rng_seed = 0;

  void Validate() const;
};

// Skip-gram with negative sampling over the token_embedding table only.
// Each word is represented by the mean of its token ids (unigram plus
// n-grams); targets are context-word unigram rows of the same table, and
// negatives are unigram ids drawn from the corpus unigram distribution
// raised to 0.75.
encoder::EncoderCheckpoint PretrainEmbeddings(const std::vector<std::string>& corpus_texts,
                                              const encoder::EncoderCheckpoint& init,
                                              const PretrainConfig& config);

struct MergeComponent {
  const encoder::EncoderCheckpoint* checkpoint = nullptr;
  double weight = 0.0;
};

// Entrywise weighted sum accumulated in double and stored as binary32.
// Requires >= 2 components, nonnegative weights summing to 1 within 1e-9,
// identical configs and identical tensor names and shapes.
encoder::EncoderCheckpoint MergeCheckpoints(std::span<const MergeComponent> components);

// {"components": [{"path": "...", "weight": 0.2}, ...]}; relative paths
// resolve against the spec file's directory.
struct MergeSpecEntry {
  std::filesystem::path path;
  double weight = 0.0;
};
std::vector<MergeSpecEntry> LoadMergeSpec(const std::filesystem::path& path);

}  // namespace ebr::training
