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
#include <string>
#include <string_view>
#include <vector>

namespace ebr {

// Canonical query preprocessing shared by training and serving: lowercase,
// ASCII whitespace collapsed to single spaces, trimmed, and every character
// outside [a-z0-9 .-] dropped. Idempotent.
std::string NormalizeQuery(std::string_view raw);

// FNV-1a, 64-bit: offset basis 0xcbf29ce484222325, prime 0x100000001b3,
// applied byte by byte (xor then multiply) over the UTF-8 bytes.
constexpr std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::vector<std::string> SplitWords(std::string_view text);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace ebr
