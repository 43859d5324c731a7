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
#include <optional>
#include <string>
#include <string_view>

#include "ebr/cache.hpp"
#include "ebr/curation.hpp"
#include "ebr/evaluation.hpp"
#include "ebr/index.hpp"
#include "ebr/pipeline.hpp"
#include "ebr/synthetic.hpp"

namespace ebr::config {

// Everything a pipeline run reads from the TOML file.
struct PipelineConfig {
  std::optional<std::uint64_t> seed;  // global override for every rng_seed
  synthetic::CorpusSpec corpus;
  curation::CurationConfig curation;
  double holdout_fraction = 0.1;
  pipeline::TrainPlan train;
  index::HnswParams index;
  bool exact_index = false;
  eval::EvalConfig eval;
  std::size_t eval_k = 200;  // depth of runs pooled for the eval set
  service::CacheConfig cache;
  std::size_t default_k = 200;
  std::string host = "0.0.0.0";
  int port = 8080;
  std::optional<std::string> embed_url;  // remote query tower
  std::map<std::string, std::filesystem::path> paths;  // resolved against the file's directory

  // The configured path for `name`, or an error naming the flag to pass.
  std::filesystem::path Path(const std::string& name) const;
  void ApplySeed(std::uint64_t seed);
  void Validate() const;
};

PipelineConfig ParseConfig(std::string_view text, const std::filesystem::path& base_dir = ".");
PipelineConfig LoadConfig(const std::filesystem::path& path);

}  // namespace ebr::config
