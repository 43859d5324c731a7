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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ebr/io.hpp"

namespace ebr::corpus {

// Catalog item. Canonical field names are "title", "category" (a
// "A > B > C" path), "description" and "spec:<key>"; any other nonempty
// name is accepted.
struct ProductRecord {
  std::string sku;
  std::map<std::string, std::string> fields;

  // Returns nullptr when the field is absent.
  const std::string* Field(std::string_view name) const;
  // Empty string when absent.
  std::string_view FieldOr(std::string_view name) const;
};

// Throws ErrorCode::kInvalidArgument when the record breaks an invariant.
void ValidateProduct(const ProductRecord& product);

// Top-level segment of the " > "-joined category path ("" when absent).
std::string TopCategory(const ProductRecord& product);
// Last segment of the category path ("" when absent).
std::string LeafCategory(const ProductRecord& product);

// Immutable product collection in file order with O(1) sku lookup.
class Catalog {
 public:
  Catalog() = default;
  // Throws ErrorCode::kDuplicate on a repeated sku.
  explicit Catalog(std::vector<ProductRecord> products);

  const std::vector<ProductRecord>& products() const { return products_; }
  std::size_t size() const { return products_.size(); }

  const ProductRecord* Find(std::string_view sku) const;
  // Throws ErrorCode::kNotFound naming the sku.
  const ProductRecord& At(std::string_view sku) const;

 private:
  std::vector<ProductRecord> products_;
  std::unordered_map<std::string, std::size_t> by_sku_;
};

enum class Signal : std::uint8_t {
  kPdpView = 0,
  kPlpAtc,
  kPlpCheckAvailability,
  kPdpAtc,
  kPdpCheckAvailability,
};
inline constexpr std::size_t kSignalCount = 5;

std::string_view SignalName(Signal signal);
std::optional<Signal> ParseSignal(std::string_view name);

struct EngagementEvent {
  std::string visitor_id;
  std::string raw_query;
  std::string sku;
  Signal signal = Signal::kPdpView;
  std::int64_t timestamp = 0;
};

struct EngagementAggregate {
  std::string query;  // normalized
  std::string sku;
  std::array<std::uint64_t, kSignalCount> signal_counts{};
  std::uint64_t unique_visitors = 0;

  std::uint64_t total_signals() const;
};

// Normalized query -> search count (every count >= 1).
using QueryHistory = std::map<std::string, std::uint64_t>;

// Groups events by (normalized query, sku). Output is sorted by
// (query, sku), which makes it independent of input order.
std::vector<EngagementAggregate> AggregateEvents(const std::vector<EngagementEvent>& events);

Catalog LoadCatalog(const std::filesystem::path& path);
void SaveCatalog(const std::filesystem::path& path, const Catalog& catalog);
Json ProductToJson(const ProductRecord& product);

std::vector<EngagementEvent> LoadEvents(const std::filesystem::path& path);
void SaveEvents(const std::filesystem::path& path, const std::vector<EngagementEvent>& events);

std::vector<EngagementAggregate> LoadAggregates(const std::filesystem::path& path);
void SaveAggregates(const std::filesystem::path& path,
                    const std::vector<EngagementAggregate>& aggregates);

// Queries are normalized on load; repeated queries have their counts summed.
QueryHistory LoadQueryHistory(const std::filesystem::path& path);
void SaveQueryHistory(const std::filesystem::path& path, const QueryHistory& history);

}  // namespace ebr::corpus
