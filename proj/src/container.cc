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

#include "container.h"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "status.h"

namespace mecdt {
namespace {

static_assert(std::endian::native == std::endian::little,
              "container encoding assumes a little-endian host");

constexpr char kMagic[8] = {'M', 'E', 'C', 'D', 'T', 'B', 'I', 'N'};
constexpr size_t kDigestSize = 32;

template <typename T>
void Put(std::vector<unsigned char>& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

class Reader {
 public:
  Reader(const std::vector<unsigned char>& bytes, size_t end)
      : bytes_(bytes), end_(end) {}

  template <typename T>
  T Take() {
    Need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string TakeString(size_t n) {
    Need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  const unsigned char* TakeRaw(size_t n) {
    Need(n);
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  size_t pos() const { return pos_; }

 private:
  void Need(size_t n) const {
    if (n > end_ - pos_) Fail(ErrorCode::kIntegrity, "container truncated");
  }
  const std::vector<unsigned char>& bytes_;
  size_t end_;
  size_t pos_ = 0;
};

void Digest(const void* data, size_t size, unsigned char* out) {
  unsigned int len = 0;
  if (EVP_Digest(data, size, out, &len, EVP_sha256(), nullptr) != 1 ||
      len != kDigestSize) {
    Fail(ErrorCode::kIo, "SHA-256 computation failed");
  }
}

}  // namespace

const NamedArray& Container::Get(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  Fail(ErrorCode::kIntegrity, "container has no array '" + name + "'");
}

std::vector<unsigned char> EncodeContainer(const Container& c) {
  nlohmann::json header;
  header["meta"] = c.meta;
  header["arrays"] = nlohmann::json::array();
  for (const auto& a : c.arrays) {
    int64_t count = 1;
    for (int64_t d : a.shape) count *= d;
    Require(count == static_cast<int64_t>(a.data.size()),
            "array '" + a.name + "' shape does not match its data");
    header["arrays"].push_back(
        {{"name", a.name}, {"shape", a.shape}, {"count", count}});
  }
  const std::string header_text = header.dump();

  std::vector<unsigned char> out;
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  Put<uint32_t>(out, kContainerVersion);
  Put<uint32_t>(out, static_cast<uint32_t>(c.kind.size()));
  out.insert(out.end(), c.kind.begin(), c.kind.end());
  Put<uint64_t>(out, header_text.size());
  out.insert(out.end(), header_text.begin(), header_text.end());
  for (const auto& a : c.arrays) {
    const auto* p = reinterpret_cast<const unsigned char*>(a.data.data());
    out.insert(out.end(), p, p + a.data.size() * sizeof(double));
  }
  unsigned char digest[kDigestSize];
  Digest(out.data(), out.size(), digest);
  out.insert(out.end(), digest, digest + kDigestSize);
  return out;
}

Container DecodeContainer(const std::vector<unsigned char>& bytes,
                          const std::string& expected_kind) {
  if (bytes.size() < sizeof(kMagic) + kDigestSize) {
    Fail(ErrorCode::kIntegrity, "container truncated");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    Fail(ErrorCode::kIntegrity, "not a mecdt container (bad magic)");
  }
  const size_t body = bytes.size() - kDigestSize;
  unsigned char digest[kDigestSize];
  Digest(bytes.data(), body, digest);
  if (std::memcmp(digest, bytes.data() + body, kDigestSize) != 0) {
    Fail(ErrorCode::kIntegrity, "container checksum mismatch");
  }

  Reader r(bytes, body);
  r.TakeRaw(sizeof(kMagic));
  const auto version = r.Take<uint32_t>();
  if (version != kContainerVersion) {
    Fail(ErrorCode::kIntegrity, "unsupported container version " +
                                    std::to_string(version) + " (expected " +
                                    std::to_string(kContainerVersion) + ")");
  }
  Container c;
  c.kind = r.TakeString(r.Take<uint32_t>());
  if (c.kind != expected_kind) {
    Fail(ErrorCode::kIntegrity, "container kind '" + c.kind + "', expected '" +
                                    expected_kind + "'");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.TakeString(r.Take<uint64_t>()));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIntegrity, std::string("bad container header: ") + e.what());
  }
  c.meta = header.at("meta");
  for (const auto& entry : header.at("arrays")) {
    NamedArray a;
    a.name = entry.at("name").get<std::string>();
    a.shape = entry.at("shape").get<std::vector<int64_t>>();
    const auto count = entry.at("count").get<int64_t>();
    a.data.resize(count);
    std::memcpy(a.data.data(), r.TakeRaw(count * sizeof(double)),
                count * sizeof(double));
    c.arrays.push_back(std::move(a));
  }
  if (r.pos() != body) Fail(ErrorCode::kIntegrity, "trailing bytes in container");
  return c;
}

void WriteContainer(const std::filesystem::path& path, const Container& c) {
  const auto bytes = EncodeContainer(c);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIo, "cannot write " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    if (!out) Fail(ErrorCode::kIo, "short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Container ReadContainer(const std::filesystem::path& path,
                        const std::string& expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return DecodeContainer(bytes, expected_kind);
}

std::string Sha256Hex(const void* data, size_t size) {
  unsigned char digest[kDigestSize];
  Digest(data, size, digest);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * kDigestSize);
  for (unsigned char b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 15]);
  }
  return out;
}

std::string FileSha256Hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return Sha256Hex(bytes.data(), bytes.size());
}

}  // namespace mecdt
