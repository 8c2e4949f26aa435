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
#include <span>
#include <utility>
#include <vector>

namespace salt::mulkern {

// Modulus the shift-fold reducer is built for: 2^13 - 2^9 + 1. The fold
// constants below are derived from this value and from nothing else.
inline constexpr uint32_t kFoldModulus = 7681;

// Bound on |b| coefficients; they must fit a signed 6-bit lane register.
inline constexpr int32_t kSignedMagLimit = 31;

// One dual 18-bit product field: raw = a*|b0| + (a*|b1|) << 18. With
// a < 2^13 and |b| <= 31 each partial product stays below 2^18, so the two
// fields never overlap.
struct PackedProduct {
  uint64_t raw;

  uint32_t low() const { return static_cast<uint32_t>(raw & 0x3ffff); }
  uint32_t high() const { return static_cast<uint32_t>((raw >> 18) & 0x3ffff); }
};

PackedProduct pack_products(uint32_t a, int32_t b0, int32_t b1);

// Folds an 18-bit value toward [0, 2q) using 2^13 = 2^9 - 1 (mod q), applied
// twice. No final subtraction; callers that need a canonical result use
// mod_reduce_approx. Exposed so the single-subtraction property can be
// checked directly.
uint32_t mod_fold(uint32_t x);

// x mod 7681 for x in [0, 2^18): two fold rounds plus exactly one
// conditional subtraction of q. Throws InvalidInput for x >= 2^18.
uint32_t mod_reduce_approx(uint32_t x, uint32_t q = kFoldModulus);

// Dual signed modular multiply: one wide multiplication of a by
// (|b0| + |b1| * 2^18), field extraction, reduction, and the sign fixup
// r = (q - r) mod q for negative b. Requires a in [0, q), |b0|,|b1| <= 31.
std::pair<uint32_t, uint32_t> sdmm_packed(uint32_t a, int32_t b0, int32_t b1,
                                          uint32_t q = kFoldModulus);

// Cycle accounting for the modeled three-stage multiplier pipeline:
// serial operand load, accumulation (plus two cycles of unit latency as
// pipeline fill), serial readout.
struct CycleCount {
  uint32_t load = 0;
  uint32_t compute = 0;
  uint32_t readout = 0;
  uint32_t total = 0;
};

struct HspmResult {
  std::vector<uint32_t> d;
  CycleCount cycles;
};

// d = a*b + c in Z_q[x]/(x^n + 1). Coefficients of a and c are in [0, q);
// b is the small signed operand loaded serially into the lane registers.
// n/2 lanes each produce two products per step, so every step dispatches
// all n products of one a_i against b. Throws InvalidInput on degree or
// modulus mismatch.
HspmResult hspm_multiply(std::span<const uint32_t> a,
                         std::span<const int32_t> b,
                         std::span<const uint32_t> c,
                         uint32_t q = kFoldModulus);

}  // namespace salt::mulkern
