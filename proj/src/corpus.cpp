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

#include "ebr/corpus.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "ebr/error.hpp"
#include "ebr/text.hpp"

namespace ebr::corpus {
namespace {

constexpr std::array<std::string_view, kSignalCount> kSignalNames = {
    "pdp_view", "plp_atc", "plp_check_availability", "pdp_atc",
    "pdp_check_availability"};

std::vector<std::string> CategorySegments(const ProductRecord& product) {
  std::vector<std::string> segments;
  const std::string* path = product.Field("category");
  if (path == nullptr) return segments;
  std::size_t start = 0;
  while (start <= path->size()) {
    std::size_t pos = path->find('>', start);
    std::size_t end = pos == std::string::npos ? path->size() : pos;
    std::string seg = path->substr(start, end - start);
    auto first = seg.find_first_not_of(' ');
    auto last = seg.find_last_not_of(' ');
    if (first != std::string::npos) segments.push_back(seg.substr(first, last - first + 1));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return segments;
}

std::string LineError(const std::filesystem::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

}  // namespace

const std::string* ProductRecord::Field(std::string_view name) const {
  auto it = fields.find(std::string(name));
  return it == fields.end() ? nullptr : &it->second;
}

std::string_view ProductRecord::FieldOr(std::string_view name) const {
  const std::string* value = Field(name);
  return value == nullptr ? std::string_view() : std::string_view(*value);
}

void ValidateProduct(const ProductRecord& product) {
  if (product.sku.empty()) throw Error(ErrorCode::kInvalidArgument, "product sku is empty");
  bool any_text = false;
  for (const auto& [name, value] : product.fields) {
    if (name.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "product " + product.sku + " has an empty field name");
    }
    any_text = any_text || !value.empty();
  }
  if (!any_text) {
    throw Error(ErrorCode::kInvalidArgument, "product " + product.sku + " has no nonempty field");
  }
}

std::string TopCategory(const ProductRecord& product) {
  auto segments = CategorySegments(product);
  return segments.empty() ? std::string() : segments.front();
}

std::string LeafCategory(const ProductRecord& product) {
  auto segments = CategorySegments(product);
  return segments.empty() ? std::string() : segments.back();
}

Catalog::Catalog(std::vector<ProductRecord> products) : products_(std::move(products)) {
  by_sku_.reserve(products_.size());
  for (std::size_t i = 0; i < products_.size(); ++i) {
    if (!by_sku_.emplace(products_[i].sku, i).second) {
      throw Error(ErrorCode::kDuplicate, "duplicate sku " + products_[i].sku);
    }
  }
}

const ProductRecord* Catalog::Find(std::string_view sku) const {
  auto it = by_sku_.find(std::string(sku));
  return it == by_sku_.end() ? nullptr : &products_[it->second];
}

const ProductRecord& Catalog::At(std::string_view sku) const {
  const ProductRecord* product = Find(sku);
  if (product == nullptr) {
    throw Error(ErrorCode::kNotFound, "sku " + std::string(sku) + " not in catalog");
  }
  return *product;
}

std::string_view SignalName(Signal signal) {
  return kSignalNames[static_cast<std::size_t>(signal)];
}

std::optional<Signal> ParseSignal(std::string_view name) {
  for (std::size_t i = 0; i < kSignalCount; ++i) {
    if (kSignalNames[i] == name) return static_cast<Signal>(i);
  }
  return std::nullopt;
}

std::uint64_t EngagementAggregate::total_signals() const {
  std::uint64_t total = 0;
  for (auto c : signal_counts) total += c;
  return total;
}

std::vector<EngagementAggregate> AggregateEvents(const std::vector<EngagementEvent>& events) {
  struct Acc {
    std::array<std::uint64_t, kSignalCount> counts{};
    std::set<std::string> visitors;
  };
  std::map<std::pair<std::string, std::string>, Acc> groups;
  for (const auto& event : events) {
    Acc& acc = groups[{NormalizeQuery(event.raw_query), event.sku}];
    acc.counts[static_cast<std::size_t>(event.signal)]++;
    acc.visitors.insert(event.visitor_id);
  }
  std::vector<EngagementAggregate> out;
  out.reserve(groups.size());
  for (auto& [key, acc] : groups) {
    EngagementAggregate agg;
    agg.query = key.first;
    agg.sku = key.second;
    agg.signal_counts = acc.counts;
    agg.unique_visitors = acc.visitors.size();
    out.push_back(std::move(agg));
  }
  return out;
}

Json ProductToJson(const ProductRecord& product) {
  Json fields = Json::object();
  for (const auto& [name, value] : product.fields) fields[name] = value;
  return Json{{"sku", product.sku}, {"fields", fields}};
}

Catalog LoadCatalog(const std::filesystem::path& path) {
  std::vector<ProductRecord> products;
  std::unordered_map<std::string, std::size_t> first_line;
  ForEachJsonl(path, [&](std::size_t line, const Json& obj) {
    ProductRecord product;
    product.sku = RequireString(obj, "sku", line);
    auto fields = obj.find("fields");
    if (fields == obj.end() || !fields->is_object()) {
      throw Error(ErrorCode::kParse, LineError(path, line) + "missing object field 'fields'");
    }
    for (const auto& [name, value] : fields->items()) {
      if (!value.is_string()) {
        throw Error(ErrorCode::kParse,
                    LineError(path, line) + "field '" + name + "' is not a string");
      }
      product.fields[name] = value.get<std::string>();
    }
    try {
      ValidateProduct(product);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, LineError(path, line) + e.what());
    }
    auto [it, inserted] = first_line.emplace(product.sku, line);
    if (!inserted) {
      throw Error(ErrorCode::kDuplicate, LineError(path, line) + "duplicate sku " + product.sku +
                                             " (first seen on line " +
                                             std::to_string(it->second) + ")");
    }
    products.push_back(std::move(product));
  });
  return Catalog(std::move(products));
}

void SaveCatalog(const std::filesystem::path& path, const Catalog& catalog) {
  std::vector<Json> rows;
  rows.reserve(catalog.size());
  for (const auto& p : catalog.products()) rows.push_back(ProductToJson(p));
  WriteJsonl(path, rows);
}

std::vector<EngagementEvent> LoadEvents(const std::filesystem::path& path) {
  std::vector<EngagementEvent> events;
  ForEachJsonl(path, [&](std::size_t line, const Json& obj) {
    EngagementEvent event;
    event.visitor_id = RequireString(obj, "visitor_id", line);
    event.raw_query = RequireString(obj, "query", line);
    event.sku = RequireString(obj, "sku", line);
    std::string signal = RequireString(obj, "signal", line);
    auto parsed = ParseSignal(signal);
    if (!parsed) {
      throw Error(ErrorCode::kParse, LineError(path, line) + "unknown signal '" + signal + "'");
    }
    if (event.visitor_id.empty()) {
      throw Error(ErrorCode::kParse, LineError(path, line) + "empty visitor_id");
    }
    event.signal = *parsed;
    event.timestamp = obj.contains("ts") ? RequireInt(obj, "ts", line) : 0;
    events.push_back(std::move(event));
  });
  return events;
}

void SaveEvents(const std::filesystem::path& path, const std::vector<EngagementEvent>& events) {
  std::vector<Json> rows;
  rows.reserve(events.size());
  for (const auto& e : events) {
    rows.push_back(Json{{"visitor_id", e.visitor_id},
                        {"query", e.raw_query},
                        {"sku", e.sku},
                        {"signal", SignalName(e.signal)},
                        {"ts", e.timestamp}});
  }
  WriteJsonl(path, rows);
}

std::vector<EngagementAggregate> LoadAggregates(const std::filesystem::path& path) {
  std::vector<EngagementAggregate> out;
  ForEachJsonl(path, [&](std::size_t line, const Json& obj) {
    EngagementAggregate agg;
    agg.query = RequireString(obj, "query", line);
    agg.sku = RequireString(obj, "sku", line);
    agg.unique_visitors = static_cast<std::uint64_t>(RequireInt(obj, "unique_visitors", line));
    auto counts = obj.find("signal_counts");
    if (counts != obj.end()) {
      for (const auto& [name, value] : counts->items()) {
        auto signal = ParseSignal(name);
        if (!signal || !value.is_number_unsigned()) {
          throw Error(ErrorCode::kParse, LineError(path, line) + "bad signal count '" + name + "'");
        }
        agg.signal_counts[static_cast<std::size_t>(*signal)] = value.get<std::uint64_t>();
      }
    }
    out.push_back(std::move(agg));
  });
  return out;
}

void SaveAggregates(const std::filesystem::path& path,
                    const std::vector<EngagementAggregate>& aggregates) {
  std::vector<Json> rows;
  rows.reserve(aggregates.size());
  for (const auto& a : aggregates) {
    Json counts = Json::object();
    for (std::size_t i = 0; i < kSignalCount; ++i) {
      if (a.signal_counts[i] > 0) counts[std::string(kSignalNames[i])] = a.signal_counts[i];
    }
    rows.push_back(Json{{"query", a.query},
                        {"sku", a.sku},
                        {"signal_counts", counts},
                        {"unique_visitors", a.unique_visitors}});
  }
  WriteJsonl(path, rows);
}

QueryHistory LoadQueryHistory(const std::filesystem::path& path) {
  QueryHistory history;
  ForEachJsonl(path, [&](std::size_t line, const Json& obj) {
    std::string query = NormalizeQuery(RequireString(obj, "query", line));
    std::int64_t count = RequireInt(obj, "count", line);
    if (count < 1) {
      throw Error(ErrorCode::kParse, LineError(path, line) + "count must be >= 1");
    }
    if (query.empty()) return;
    history[query] += static_cast<std::uint64_t>(count);
  });
  return history;
}

void SaveQueryHistory(const std::filesystem::path& path, const QueryHistory& history) {
  std::vector<Json> rows;
  for (const auto& [query, count] : history) rows.push_back(Json{{"query", query}, {"count", count}});
  WriteJsonl(path, rows);
}

}  // namespace ebr::corpus
