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
#include <string_view>

namespace salt {

// SplitMix64. All randomness in the project flows through this generator so
// that every run is reproducible from a 64-bit seed, and so that other
// implementations of the file formats can reproduce byte-identical output.
// See docs/FORMATS.md for the exact constants.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, bound) via rejection.
  uint64_t next_below(uint64_t bound) {
    const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  uint64_t state() const { return state_; }

 private:
  uint64_t state_;
};

// One round of the SplitMix64 output function; used to scramble seeds.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over a byte range.
inline uint64_t fnv1a64(const void* data, size_t len,
                        uint64_t basis = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const uint8_t*>(data);
  uint64_t h = basis;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s,
                        uint64_t basis = 0xcbf29ce484222325ULL) {
  return fnv1a64(s.data(), s.size(), basis);
}

// Derives an independent generator from a master seed and a stream label,
// e.g. stream_rng(seed, "e1"). Streams with distinct labels are independent.
inline SplitMix64 stream_rng(uint64_t seed, std::string_view label) {
  return SplitMix64(mix64(seed ^ fnv1a64(label)));
}

// Derives an independent generator for the i-th item of a labeled stream.
inline SplitMix64 stream_rng(uint64_t seed, std::string_view label,
                             uint64_t index) {
  return SplitMix64(mix64(seed ^ fnv1a64(label)) ^ mix64(index + 1));
}

}  // namespace salt
