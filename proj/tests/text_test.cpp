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

#include <random>
#include <string>

#include "doctest.h"
#include "ebr/text.hpp"

namespace ebr {
namespace {

TEST_SUITE("text") {

TEST_CASE("normalize_query examples") {
  CHECK(NormalizeQuery("  iPhone 13 CASE ") == "iphone 13 case");
  CHECK(NormalizeQuery("tv") == "tv");
  CHECK(NormalizeQuery("Wi-Fi Router!!") == "wi-fi router");
  CHECK(NormalizeQuery("") == "");
  CHECK(NormalizeQuery("   ") == "");
  CHECK(NormalizeQuery("a\t\n b") == "a b");
  CHECK(NormalizeQuery("55\" TV, 4K") == "55 tv 4k");
  CHECK(NormalizeQuery("3.5mm jack") == "3.5mm jack");
}

TEST_CASE("normalize_query is idempotent on random strings") {
  std::mt19937_64 rng(42);
  const std::string alphabet = "abcXYZ019 .-_!?\t\n\r\"'#/\xc3\xa9\xe2\x80\x94";
  std::uniform_int_distribution<std::size_t> len(0, 40), pick(0, alphabet.size() - 1);
  for (int trial = 0; trial < 5000; ++trial) {
    std::string raw;
    for (std::size_t i = len(rng); i > 0; --i) raw.push_back(alphabet[pick(rng)]);
    const std::string once = NormalizeQuery(raw);
    CHECK(NormalizeQuery(once) == once);
    for (char c : once) {
      const bool allowed = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == ' ' ||
                           c == '-' || c == '.';
      CHECK(allowed);
    }
    CHECK(once.find("  ") == std::string::npos);
    if (!once.empty()) {
      CHECK(once.front() != ' ');
      CHECK(once.back() != ' ');
    }
  }
}

TEST_CASE("fnv1a64 matches published test vectors") {
  CHECK(Fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(Fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(Fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("split and join") {
  CHECK(SplitWords("a  b c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(SplitWords("").empty());
  CHECK(Join({"x", "y"}, " ") == "x y");
}

}  // TEST_SUITE

}  // namespace
}  // namespace ebr
