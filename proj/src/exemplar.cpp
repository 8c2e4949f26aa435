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

#include "salt/exemplar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "salt/errors.hpp"
#include "salt/rng.hpp"

namespace salt::exemplar {

namespace {

// Floor for degenerate thresholds (all training points on their centers),
// keeping 0 < tau1 < tau2.
constexpr double kTauFloor = 1e-9;

}  // namespace

const char* to_string(DriftCase c) {
  switch (c) {
    case DriftCase::Known: return "known";
    case DriftCase::Drifted: return "drifted";
    case DriftCase::Novel: return "novel";
  }
  return "?";
}

void ClusterModel::validate() const {
  if (centers.empty()) throw InvalidInput("cluster model needs at least one center");
  for (const auto& c : centers)
    if (c.size() != centers[0].size())
      throw InvalidInput("cluster centers disagree on dimension");
  if (!(tau1 > 0.0) || !(tau2 > tau1))
    throw InvalidInput("thresholds must satisfy 0 < tau1 < tau2");
}

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
  if (a.size() != b.size()) throw InvalidInput("feature dimension mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::pair<size_t, double> nearest_center(const FeatureVector& f,
                                         const ClusterModel& m) {
  size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < m.centers.size(); ++i) {
    const double d2 = squared_distance(f, m.centers[i]);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return {best, std::sqrt(best_d2)};
}

std::vector<FeatureVector> kmeanspp_seed(std::span<const FeatureVector> points,
                                         size_t k, uint64_t seed) {
  if (points.empty()) throw InvalidInput("kmeanspp_seed: no points");
  if (k == 0 || k > points.size())
    throw InvalidInput("kmeanspp_seed: k must be in [1, point count]");

  SplitMix64 rng = stream_rng(seed, "kmeans++");
  std::vector<size_t> chosen;
  std::vector<bool> is_chosen(points.size(), false);
  chosen.push_back(rng.next_below(points.size()));
  is_chosen[chosen[0]] = true;

  std::vector<double> d2(points.size());
  while (chosen.size() < k) {
    double total = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (size_t c : chosen)
        best = std::min(best, squared_distance(points[i], points[c]));
      d2[i] = best;
      total += best;
    }

    size_t pick = points.size();
    if (total > 0.0) {
      const double r = rng.next_double() * total;
      double acc = 0.0;
      for (size_t i = 0; i < points.size(); ++i) {
        acc += d2[i];
        if (r < acc) {
          pick = i;
          break;
        }
      }
      if (pick == points.size()) pick = points.size() - 1;  // rounding tail
    } else {
      // All remaining mass is zero (duplicate dataset): fall back to a
      // uniform draw over the indices not chosen yet.
      const size_t free_count = points.size() - chosen.size();
      size_t nth = rng.next_below(free_count);
      for (size_t i = 0; i < points.size(); ++i) {
        if (is_chosen[i]) continue;
        if (nth-- == 0) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
    is_chosen[pick] = true;
  }

  std::vector<FeatureVector> centers;
  centers.reserve(k);
  for (size_t c : chosen) centers.push_back(points[c]);
  return centers;
}

ClusterModel kmeans_cluster(std::span<const FeatureVector> points,
                            std::vector<FeatureVector> init_centers,
                            const LloydConfig& cfg) {
  if (points.empty()) throw InvalidInput("kmeans_cluster: no points");
  if (init_centers.empty()) throw InvalidInput("kmeans_cluster: no centers");
  if (cfg.tol <= 0.0) throw InvalidInput("kmeans_cluster: tol must be positive");

  ClusterModel m;
  m.centers = std::move(init_centers);
  const size_t k = m.centers.size();
  std::vector<size_t> assign(points.size(), 0);

  for (uint32_t iter = 0; iter < cfg.max_iter; ++iter) {
    // Assignment; ties go to the lowest center index.
    double cost = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      size_t best = 0;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < k; ++c) {
        const double d2 = squared_distance(points[i], m.centers[c]);
        if (d2 < best_d2) {
          best_d2 = d2;
          best = c;
        }
      }
      assign[i] = best;
      cost += best_d2;
    }
    m.lloyd_cost_trace.push_back(cost);

    // Center update.
    std::vector<FeatureVector> next(k, FeatureVector(m.centers[0].size(), 0.0));
    std::vector<size_t> counts(k, 0);
    for (size_t i = 0; i < points.size(); ++i) {
      ++counts[assign[i]];
      for (size_t d = 0; d < points[i].size(); ++d)
        next[assign[i]][d] += points[i][d];
    }
    for (size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed an emptied cluster to the point farthest from its own
        // assigned center.
        size_t far_i = 0;
        double far_d2 = -1.0;
        for (size_t i = 0; i < points.size(); ++i) {
          const double d2 = squared_distance(points[i], m.centers[assign[i]]);
          if (d2 > far_d2) {
            far_d2 = d2;
            far_i = i;
          }
        }
        next[c] = points[far_i];
      } else {
        for (double& v : next[c]) v /= static_cast<double>(counts[c]);
      }
    }

    double max_move = 0.0;
    for (size_t c = 0; c < k; ++c)
      max_move = std::max(max_move,
                          std::sqrt(squared_distance(next[c], m.centers[c])));
    m.centers = std::move(next);
    if (max_move < cfg.tol) break;
  }

  // Final stats over nearest-center distances.
  m.stats.assign(k, CenterStats{});
  double mean = 0.0, m2 = 0.0;
  std::vector<double> dists(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    const auto [c, d] = nearest_center(points[i], m);
    dists[i] = d;
    m.stats[c].count += 1;
    m.stats[c].mean_distance += d;
    mean += d;
  }
  for (auto& s : m.stats)
    if (s.count > 0) s.mean_distance /= static_cast<double>(s.count);
  mean /= static_cast<double>(points.size());
  for (double d : dists) m2 += (d - mean) * (d - mean);
  const double stddev = std::sqrt(m2 / static_cast<double>(points.size()));

  m.tau1 = cfg.tau1_override > 0.0 ? cfg.tau1_override
                                   : std::max(mean + 2.0 * stddev, kTauFloor);
  m.tau2 = cfg.tau2_override > 0.0 ? cfg.tau2_override
                                   : std::max(mean + 4.0 * stddev, 2.0 * kTauFloor);
  if (m.tau2 <= m.tau1) m.tau2 = m.tau1 * 2.0;
  m.validate();
  return m;
}

DriftCase classify_drift(const FeatureVector& f, const ClusterModel& m) {
  m.validate();
  const double d = nearest_center(f, m).second;
  if (d <= m.tau1) return DriftCase::Known;
  if (d <= m.tau2) return DriftCase::Drifted;
  return DriftCase::Novel;
}

std::vector<size_t> select_exemplars(std::span<const FeatureVector> features,
                                     const ClusterModel& m) {
  std::vector<size_t> out;
  for (size_t i = 0; i < features.size(); ++i)
    if (classify_drift(features[i], m) != DriftCase::Known) out.push_back(i);
  return out;
}

Bytes serialize_model(const ClusterModel& m) {
  m.validate();
  ByteWriter w;
  w.magic("SKMN");
  w.u8(kModelVersion);
  w.u16(static_cast<uint16_t>(m.k()));
  w.u16(static_cast<uint16_t>(m.dims()));
  for (const auto& c : m.centers)
    for (double v : c) w.f64(v);
  w.f64(m.tau1);
  w.f64(m.tau2);
  return w.take();
}

ClusterModel parse_model(std::span<const uint8_t> data) {
  ByteReader r(data);
  r.expect_magic("SKMN");
  if (r.u8() != kModelVersion) throw DecodeError("unsupported SKMN version");
  const uint16_t k = r.u16();
  const uint16_t dims = r.u16();
  if (k == 0 || dims == 0) throw DecodeError("SKMN header fields out of range");
  ClusterModel m;
  m.centers.assign(k, FeatureVector(dims, 0.0));
  for (auto& c : m.centers)
    for (double& v : c) v = r.f64();
  m.tau1 = r.f64();
  m.tau2 = r.f64();
  if (!r.done()) throw DecodeError("SKMN trailing bytes");
  m.validate();
  return m;
}

}  // namespace salt::exemplar
