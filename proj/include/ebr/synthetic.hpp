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
#include <vector>

#include "ebr/corpus.hpp"

namespace ebr::synthetic {

struct CorpusSpec {
  std::size_t products = 2000;
  std::size_t sessions = 40000;  // converting search sessions
  std::size_t visitors = 6000;
  double noise_rate = 0.1;       // sessions converting on an unrelated product
  double popularity_skew = 0.8;  // Zipf exponent over products
  std::uint64_t seed = 7;
};

struct SyntheticCorpus {
  corpus::Catalog catalog;
  std::vector<corpus::EngagementEvent> events;
  corpus::QueryHistory history;
};

// Template catalog (brand, model code, category-specific attributes and
// specs) plus simulated engagement: product popularity follows a Zipf
// law, session queries come from the template query generator with token
// dropout, and a `noise_rate` share of sessions convert on a random
// product. The history counts every simulated search.
SyntheticCorpus GenerateCorpus(const CorpusSpec& spec);

}  // namespace ebr::synthetic
