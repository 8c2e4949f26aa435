// Copyright 2026 The Saltstore Authors
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
#include <cstring>
#include <span>
#include <string_view>
#include <vector>

#include "salt/errors.hpp"

namespace salt {

using Bytes = std::vector<uint8_t>;

// Little-endian append-only byte sink. All on-disk formats in the project
// are written through this class.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u16(uint16_t v) {
    buf_.push_back(static_cast<uint8_t>(v));
    buf_.push_back(static_cast<uint8_t>(v >> 8));
  }
  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void bytes(std::span<const uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void magic(std::string_view m) {
    buf_.insert(buf_.end(), m.begin(), m.end());
  }

  // LEB128-style unsigned varint, 7 bits per byte, low bits first.
  void varint(uint64_t v) {
    while (v >= 0x80) {
      buf_.push_back(static_cast<uint8_t>(v) | 0x80);
      v >>= 7;
    }
    buf_.push_back(static_cast<uint8_t>(v));
  }

  // Zigzag-mapped signed varint.
  void svarint(int64_t v) {
    varint((static_cast<uint64_t>(v) << 1) ^ static_cast<uint64_t>(v >> 63));
  }

  size_t size() const { return buf_.size(); }
  const Bytes& data() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Bounds-checked little-endian reader. Throws DecodeError on truncation.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> b) : buf_(b) {}

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16() {
    auto b = take(2);
    return static_cast<uint16_t>(b[0] | b[1] << 8);
  }
  uint32_t u32() {
    auto b = take(4);
    uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = v << 8 | b[i];
    return v;
  }
  uint64_t u64() {
    auto b = take(8);
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = v << 8 | b[i];
    return v;
  }
  double f64() {
    uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::span<const uint8_t> bytes(size_t n) { return take(n); }

  void expect_magic(std::string_view m) {
    auto b = take(m.size());
    if (std::string_view(reinterpret_cast<const char*>(b.data()), b.size()) != m)
      throw DecodeError("bad magic, expected '" + std::string(m) + "'");
  }

  uint64_t varint() {
    uint64_t v = 0;
    int shift = 0;
    for (;;) {
      if (shift >= 64) throw DecodeError("varint overflow");
      uint8_t byte = u8();
      v |= static_cast<uint64_t>(byte & 0x7f) << shift;
      if (!(byte & 0x80)) return v;
      shift += 7;
    }
  }

  int64_t svarint() {
    uint64_t z = varint();
    return static_cast<int64_t>(z >> 1) ^ -static_cast<int64_t>(z & 1);
  }

  size_t remaining() const { return buf_.size() - pos_; }
  bool done() const { return pos_ == buf_.size(); }
  size_t pos() const { return pos_; }

 private:
  std::span<const uint8_t> take(size_t n) {
    if (n > remaining()) throw DecodeError("truncated input");
    auto s = buf_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::span<const uint8_t> buf_;
  size_t pos_ = 0;
};

}  // namespace salt
