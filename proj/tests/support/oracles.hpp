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
//
// Independent reference implementations that the test suites check the
// library against. They are written with plain loops and wide arithmetic
// and share no code with the implementation paths they verify.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "salt/codec.hpp"
#include "salt/exemplar.hpp"
#include "salt/rng.hpp"

namespace oracles {

// Schoolbook negacyclic polynomial multiply-accumulate in Z_q[x]/(x^n+1),
// computed with 64-bit signed arithmetic and plain remainders.
inline std::vector<uint32_t> negacyclic_mul_add(
    const std::vector<uint32_t>& a, const std::vector<int32_t>& b,
    const std::vector<uint32_t>& c, uint32_t q) {
  const size_t n = a.size();
  std::vector<int64_t> wide(n, 0);
  for (size_t i = 0; i < n; ++i) wide[i] = c[i];
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      const int64_t prod = static_cast<int64_t>(a[i]) * b[j];
      const size_t k = i + j;
      if (k < n)
        wide[k] += prod;
      else
        wide[k - n] -= prod;
    }
  }
  std::vector<uint32_t> out(n);
  for (size_t i = 0; i < n; ++i) {
    int64_t v = wide[i] % q;
    if (v < 0) v += q;
    out[i] = static_cast<uint32_t>(v);
  }
  return out;
}

// Exact dual signed modular product.
inline std::pair<uint32_t, uint32_t> exact_dual_modmul(uint32_t a, int32_t b0,
                                                       int32_t b1, uint32_t q) {
  auto one = [&](int32_t b) {
    int64_t v = static_cast<int64_t>(a) * b % q;
    if (v < 0) v += q;
    return static_cast<uint32_t>(v);
  };
  return {one(b0), one(b1)};
}

// Exhaustive full-search block matching with the same tie rule stated for
// the codec: (0,0) first, then lexicographically smallest (dy, dx).
inline salt::codec::MotionVector full_search_block(
    const salt::codec::Frame& prev, const salt::codec::Frame& cur, int by,
    int bx, int block, int radius) {
  auto sad = [&](int dy, int dx) {
    long long acc = 0;
    for (int y = 0; y < block; ++y)
      for (int x = 0; x < block; ++x)
        acc += std::abs(static_cast<int>(cur.at(by + y, bx + x)) -
                        static_cast<int>(prev.at(by + y + dy, bx + x + dx)));
    return acc;
  };
  long long best = sad(0, 0);
  salt::codec::MotionVector mv{0, 0};
  for (int dy = -radius; dy <= radius; ++dy) {
    if (by + dy < 0 || by + dy + block > prev.height) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      if (bx + dx < 0 || bx + dx + block > prev.width) continue;
      if (dy == 0 && dx == 0) continue;
      const long long cost = sad(dy, dx);
      if (cost < best) {
        best = cost;
        mv = {static_cast<int16_t>(dy), static_cast<int16_t>(dx)};
      }
    }
  }
  return mv;
}

// Requantization pyramid: reconstruction error after decoding k layers,
// computed directly from the residual values.
inline std::vector<std::vector<int32_t>> requantize_layers(
    const std::vector<int16_t>& residual, uint32_t num_layers,
    uint32_t base_step) {
  std::vector<int32_t> rem(residual.begin(), residual.end());
  std::vector<std::vector<int32_t>> recon_per_layer;
  std::vector<int32_t> acc(residual.size(), 0);
  for (uint32_t k = 1; k <= num_layers; ++k) {
    const int32_t step =
        static_cast<int32_t>(std::max(base_step >> (k - 1), 1u));
    for (size_t i = 0; i < rem.size(); ++i) {
      const int32_t mag = std::abs(rem[i]);
      int32_t qv = (mag + step / 2) / step;
      if (rem[i] < 0) qv = -qv;
      acc[i] += qv * step;
      rem[i] -= qv * step;
    }
    recon_per_layer.push_back(acc);
  }
  return recon_per_layer;
}

// Brute-force optimal k-means cost over all assignments (k^n, for tiny n).
inline double kmeans_optimal_cost(
    const std::vector<salt::exemplar::FeatureVector>& points, size_t k) {
  const size_t n = points.size();
  const size_t dims = points[0].size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<size_t> assign(n, 0);
  size_t combos = 1;
  for (size_t i = 0; i < n; ++i) combos *= k;
  for (size_t code = 0; code < combos; ++code) {
    size_t rest = code;
    for (size_t i = 0; i < n; ++i) {
      assign[i] = rest % k;
      rest /= k;
    }
    std::vector<std::vector<double>> centroid(k, std::vector<double>(dims, 0));
    std::vector<size_t> count(k, 0);
    for (size_t i = 0; i < n; ++i) {
      ++count[assign[i]];
      for (size_t d = 0; d < dims; ++d) centroid[assign[i]][d] += points[i][d];
    }
    double cost = 0;
    for (size_t i = 0; i < n; ++i) {
      if (count[assign[i]] == 0) continue;
      for (size_t d = 0; d < dims; ++d) {
        const double c = centroid[assign[i]][d] / count[assign[i]];
        const double diff = points[i][d] - c;
        cost += diff * diff;
      }
    }
    best = std::min(best, cost);
  }
  return best;
}

// Deterministic random frame.
inline salt::codec::Frame random_frame(uint16_t w, uint16_t h, uint64_t seed) {
  salt::codec::Frame f(w, h);
  salt::SplitMix64 rng(seed);
  for (auto& s : f.samples) s = static_cast<uint8_t>(rng.next_below(256));
  return f;
}

inline double frame_mse(const salt::codec::Frame& a,
                        const salt::codec::Frame& b) {
  double acc = 0;
  for (size_t i = 0; i < a.samples.size(); ++i) {
    const double d = static_cast<double>(a.samples[i]) - b.samples[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.samples.size());
}

}  // namespace oracles
