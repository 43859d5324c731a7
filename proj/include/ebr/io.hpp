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
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ebr {

using Json = nlohmann::json;

// Invokes `fn(line_number, object)` for every nonblank line of a JSONL file.
// Line numbers are 1-based. Malformed JSON and non-object lines raise
// ErrorCode::kParse naming the file and line.
void ForEachJsonl(const std::filesystem::path& path,
                  const std::function<void(std::size_t, const Json&)>& fn);

std::vector<Json> ReadJsonl(const std::filesystem::path& path);

void WriteJsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view contents);

// Field accessors that turn schema violations into kParse errors with the
// offending line number.
std::string RequireString(const Json& obj, const char* key, std::size_t line);
std::int64_t RequireInt(const Json& obj, const char* key, std::size_t line);

// Little-endian binary encoding used by the checkpoint and index formats.
class BinaryWriter {
 public:
  void U8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U16(std::uint16_t v) { Raw(v); }
  void U32(std::uint32_t v) { Raw(v); }
  void U64(std::uint64_t v) { Raw(v); }
  void F32(float v);
  void Bytes(std::string_view bytes) { out_.append(bytes); }

  const std::string& data() const { return out_; }

 private:
  template <typename T>
  void Raw(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }

  std::string out_;
};

// Bounds-checked reader; any read past the end raises ErrorCode::kFormat so
// truncated files never yield partial objects.
class BinaryReader {
 public:
  explicit BinaryReader(std::string_view data) : data_(data) {}

  std::uint8_t U8();
  std::uint16_t U16() { return static_cast<std::uint16_t>(Raw(2)); }
  std::uint32_t U32() { return static_cast<std::uint32_t>(Raw(4)); }
  std::uint64_t U64() { return Raw(8); }
  float F32();
  std::string_view Bytes(std::size_t n);

  bool AtEnd() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::uint64_t Raw(std::size_t n);

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace ebr
