// Copyright 2026 The vpgan Authors
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

#ifndef VPGAN_DETAIL_BINARY_IO_HPP
#define VPGAN_DETAIL_BINARY_IO_HPP

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vpgan/errors.hpp"

namespace vpgan::detail {

// CRC-32 (IEEE 802.3, reflected, poly 0xEDB88320), same value zlib produces.
inline std::uint32_t crc32(const unsigned char* data, std::size_t len,
                           std::uint32_t crc = 0) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  crc ^= 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) {
    crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

// Byte sink that tracks everything written, so a trailing checksum can
// cover the whole preceding payload.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) bytes_.push_back((v >> (8 * i)) & 0xFF);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back((v >> (8 * i)) & 0xFF);
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back((v >> (8 * i)) & 0xFF);
  }
  void f32(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void raw(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    bytes_.insert(bytes_.end(), p, p + len);
  }
  void str_u32(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void str_u16(const std::string& s) {
    if (s.size() > 0xFFFF) throw DataError("string too long for u16 prefix");
    u16(static_cast<std::uint16_t>(s.size()));
    raw(s.data(), s.size());
  }
  void append_crc32() { u32(crc32(bytes_.data(), bytes_.size())); }

  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

// Cursor over an in-memory file image. Every read is bounds-checked and
// errors name the offending byte offset.
class ByteReader {
 public:
  ByteReader(std::vector<unsigned char> bytes, std::string origin)
      : bytes_(std::move(bytes)), origin_(std::move(origin)) {}

  std::size_t offset() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const unsigned char* data() const { return bytes_.data(); }

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    const auto* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32() {
    const auto* p = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }
  std::uint64_t u64() {
    const auto* p = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }
  float f32() {
    std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str(std::size_t len) {
    const auto* p = take(len);
    return std::string(reinterpret_cast<const char*>(p), len);
  }
  std::string str_u32() {
    const std::uint32_t len = u32();
    return str(len);
  }
  std::string str_u16() {
    const std::uint16_t len = u16();
    return str(len);
  }
  void expect_magic(const std::string& magic, const std::string& what) {
    if (remaining() < magic.size() ||
        std::memcmp(bytes_.data() + pos_, magic.data(), magic.size()) != 0) {
      throw DataError(origin_ + ": bad magic, not a " + what + " file");
    }
    pos_ += magic.size();
  }

  // Verifies the trailing CRC32 against all bytes that precede it.
  void check_trailing_crc32() {
    if (bytes_.size() < 4) {
      throw DataError(origin_ + ": truncated at byte offset " +
                      std::to_string(bytes_.size()) + " (no checksum)");
    }
    const std::size_t body = bytes_.size() - 4;
    std::uint32_t stored = 0;
    for (int i = 3; i >= 0; --i) stored = (stored << 8) | bytes_[body + i];
    const std::uint32_t computed = crc32(bytes_.data(), body);
    if (stored != computed) {
      throw DataError(origin_ + ": checksum mismatch");
    }
  }

 private:
  const unsigned char* take(std::size_t len) {
    if (pos_ + len > bytes_.size()) {
      throw DataError(origin_ + ": truncated at byte offset " +
                      std::to_string(pos_) + " (need " + std::to_string(len) +
                      " more bytes, have " + std::to_string(remaining()) +
                      ")");
    }
    const unsigned char* p = bytes_.data() + pos_;
    pos_ += len;
    return p;
  }

  std::vector<unsigned char> bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

inline std::vector<unsigned char> read_file_bytes(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

// Write-temp-then-rename so readers never observe a partial file.
inline void write_file_atomic(const std::filesystem::path& path,
                              const void* data, std::size_t len) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::string& text) {
  write_file_atomic(path, text.data(), text.size());
}

inline void write_file_atomic(const std::filesystem::path& path,
                              const std::vector<unsigned char>& bytes) {
  write_file_atomic(path, bytes.data(), bytes.size());
}

}  // namespace vpgan::detail

#endif  // VPGAN_DETAIL_BINARY_IO_HPP
