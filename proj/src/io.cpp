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

#include "ebr/io.hpp"

#include <bit>
#include <cstring>
#include <sstream>

#include "ebr/error.hpp"

namespace ebr {

void ForEachJsonl(const std::filesystem::path& path,
                  const std::function<void(std::size_t, const Json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json obj = Json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                         ": malformed JSON object");
    }
    fn(line_no, obj);
  }
}

std::vector<Json> ReadJsonl(const std::filesystem::path& path) {
  std::vector<Json> rows;
  ForEachJsonl(path, [&](std::size_t, const Json& obj) { rows.push_back(obj); });
  return rows;
}

void WriteJsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
  std::string out;
  for (const Json& row : rows) {
    out += row.dump();
    out += '\n';
  }
  WriteFile(path, out);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

std::string RequireString(const Json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) +
                                       ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

std::int64_t RequireInt(const Json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) +
                                       ": missing integer field '" + key + "'");
  }
  return it->get<std::int64_t>();
}

void BinaryWriter::F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }

std::uint8_t BinaryReader::U8() { return static_cast<std::uint8_t>(Raw(1)); }

float BinaryReader::F32() { return std::bit_cast<float>(U32()); }

std::string_view BinaryReader::Bytes(std::size_t n) {
  if (remaining() < n) throw Error(ErrorCode::kFormat, "unexpected end of data");
  std::string_view out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::uint64_t BinaryReader::Raw(std::size_t n) {
  if (remaining() < n) throw Error(ErrorCode::kFormat, "unexpected end of data");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
  }
  pos_ += n;
  return v;
}

}  // namespace ebr
