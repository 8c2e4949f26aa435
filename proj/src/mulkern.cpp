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

#include "salt/mulkern.hpp"

#include <cstdlib>
#include <string>

#include "salt/errors.hpp"

namespace salt::mulkern {

PackedProduct pack_products(uint32_t a, int32_t b0, int32_t b1) {
  if (a >= (1u << 13))
    throw InvalidInput("pack_products: a out of 13-bit range");
  if (std::abs(b0) > kSignedMagLimit || std::abs(b1) > kSignedMagLimit)
    throw InvalidInput("pack_products: b magnitude exceeds 31");
  const uint64_t mag0 = static_cast<uint64_t>(std::abs(b0));
  const uint64_t mag1 = static_cast<uint64_t>(std::abs(b1));
  // One multiplier, two products: the packed multiplicand keeps the second
  // magnitude 18 bits up.
  return PackedProduct{a * (mag0 + (mag1 << 18))};
}

uint32_t mod_fold(uint32_t x) {
  // 2^13 = 2^9 - 1 (mod 7681). First round takes 18-bit inputs below
  // ~3.13q; the second leaves everything below 2q.
  for (int round = 0; round < 2; ++round) {
    const uint32_t hi = x >> 13;
    x = (x & 0x1fff) + (hi << 9) - hi;
  }
  return x;
}

uint32_t mod_reduce_approx(uint32_t x, uint32_t q) {
  if (q != kFoldModulus)
    throw InvalidInput("mod_reduce_approx: fold constants require q = 7681");
  if (x >= (1u << 18))
    throw InvalidInput("mod_reduce_approx: input exceeds 18 bits");
  uint32_t r = mod_fold(x);
  if (r >= q) r -= q;
  return r;
}

std::pair<uint32_t, uint32_t> sdmm_packed(uint32_t a, int32_t b0, int32_t b1,
                                          uint32_t q) {
  if (q != kFoldModulus)
    throw InvalidInput("sdmm_packed: fold constants require q = 7681");
  if (a >= q) throw InvalidInput("sdmm_packed: a out of range");

  const PackedProduct p = pack_products(a, b0, b1);
  uint32_t r0 = mod_reduce_approx(p.low(), q);
  uint32_t r1 = mod_reduce_approx(p.high(), q);
  // Sign bit selects the subtraction from q: b*a mod q = q - (|b|*a mod q),
  // folded back to 0 when the magnitude product was 0.
  if (b0 < 0) r0 = (q - r0) % q;
  if (b1 < 0) r1 = (q - r1) % q;
  return {r0, r1};
}

HspmResult hspm_multiply(std::span<const uint32_t> a,
                         std::span<const int32_t> b,
                         std::span<const uint32_t> c, uint32_t q) {
  const size_t n = a.size();
  if (q != kFoldModulus)
    throw InvalidInput("hspm_multiply: modulus mismatch, expected 7681");
  if (n == 0 || n % 2 != 0)
    throw InvalidInput("hspm_multiply: degree must be positive and even");
  if (b.size() != n || c.size() != n)
    throw InvalidInput("hspm_multiply: operand degree mismatch");

  HspmResult out;
  out.d.assign(c.begin(), c.end());
  for (size_t i = 0; i < n; ++i) {
    if (out.d[i] >= q) throw InvalidInput("hspm_multiply: c not reduced");
    if (a[i] >= q) throw InvalidInput("hspm_multiply: a not reduced");
  }

  const size_t lanes = n / 2;
  auto accumulate = [&](size_t idx, uint32_t r) {
    // Coefficients passing degree n-1 wrap negated (x^n = -1).
    if (idx >= n) {
      idx -= n;
      r = (q - r) % q;
    }
    out.d[idx] = (out.d[idx] + r) % q;
  };

  // One step per a_i: lane u multiplies a_i by the pair (b_u, b_{u+lanes}),
  // so each step dispatches all n products.
  for (size_t i = 0; i < n; ++i) {
    for (size_t u = 0; u < lanes; ++u) {
      const auto [r0, r1] = sdmm_packed(a[i], b[u], b[u + lanes], q);
      accumulate(i + u, r0);
      accumulate(i + u + lanes, r1);
    }
  }

  const uint32_t nn = static_cast<uint32_t>(n);
  out.cycles.load = nn;          // serial load of b
  out.cycles.compute = nn + 2;   // n accumulate steps + 2-cycle unit latency
  out.cycles.readout = nn;       // serial readout of d
  out.cycles.total = out.cycles.load + out.cycles.compute + out.cycles.readout;
  return out;
}

}  // namespace salt::mulkern
