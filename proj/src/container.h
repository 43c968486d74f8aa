// Copyright 2026 The mecdt Authors.
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

#ifndef MECDT_CONTAINER_H_
#define MECDT_CONTAINER_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace mecdt {

// Versioned binary container shared by dataset shards and checkpoints.
//
// Byte layout (all integers little-endian):
//   8 bytes   magic "MECDTBIN"
//   u32       format version (kContainerVersion)
//   u32       length of the kind tag, then the tag bytes ("shard", "ckpt")
//   u64       length of the JSON header, then the header bytes. The header
//             holds {"meta": {...}, "arrays": [{"name", "shape", "count"}]}
//   f64[]     array payloads, concatenated in header order
//   32 bytes  SHA-256 over every preceding byte
inline constexpr uint32_t kContainerVersion = 1;

struct NamedArray {
  std::string name;
  std::vector<int64_t> shape;
  std::vector<double> data;
};

struct Container {
  std::string kind;
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedArray> arrays;

  const NamedArray& Get(const std::string& name) const;
};

std::vector<unsigned char> EncodeContainer(const Container& c);
// Throws Error(kIntegrity) on a bad magic, version, kind or checksum.
Container DecodeContainer(const std::vector<unsigned char>& bytes,
                          const std::string& expected_kind);

void WriteContainer(const std::filesystem::path& path, const Container& c);
Container ReadContainer(const std::filesystem::path& path,
                        const std::string& expected_kind);

std::string Sha256Hex(const void* data, size_t size);
std::string FileSha256Hex(const std::filesystem::path& path);

}  // namespace mecdt

#endif  // MECDT_CONTAINER_H_
