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
#include <random>
#include <string_view>

#include "ebr/text.hpp"

namespace ebr {

using Rng = std::mt19937_64;

constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform variate in the open interval (0, 1) derived from (seed, key) only,
// so a sampler that draws one per item is independent of input order.
inline double KeyedUniform(std::uint64_t seed, std::string_view key) {
  std::uint64_t bits = SplitMix64(seed ^ SplitMix64(Fnv1a64(key)));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Draws an index in [0, n) without relying on the implementation-defined
// std::uniform_int_distribution.
inline std::uint64_t UniformIndex(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Fisher-Yates with UniformIndex; identical output on every standard library.
template <typename It>
void Shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    std::uint64_t j = UniformIndex(rng, i);
    std::swap(first[i - 1], first[j]);
  }
}

}  // namespace ebr
