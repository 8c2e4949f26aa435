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
#include <vector>

#include "salt/bytes.hpp"

namespace salt::exemplar {

using FeatureVector = std::vector<double>;

// Distance from the nearest cluster center sorts incoming data into three
// cases: close enough to be known, moderately far (drifted members of a
// known class), or beyond the novelty threshold (a new class).
enum class DriftCase : uint8_t { Known = 0, Drifted = 1, Novel = 2 };

const char* to_string(DriftCase c);

struct CenterStats {
  uint64_t count = 0;
  double mean_distance = 0.0;
};

struct ClusterModel {
  std::vector<FeatureVector> centers;
  double tau1 = 0.0;  // known/drifted boundary
  double tau2 = 0.0;  // drifted/novel boundary
  std::vector<CenterStats> stats;
  std::vector<double> lloyd_cost_trace;  // cost after each Lloyd iteration

  size_t k() const { return centers.size(); }
  size_t dims() const { return centers.empty() ? 0 : centers[0].size(); }
  void validate() const;
};

double squared_distance(const FeatureVector& a, const FeatureVector& b);

// Index of the nearest center (lowest index wins ties) and its distance.
std::pair<size_t, double> nearest_center(const FeatureVector& f,
                                         const ClusterModel& m);

// D^2 seeding: first center uniform, each next center with probability
// proportional to squared distance from the chosen set. When every point
// carries zero mass (duplicates), the next center is uniform over the
// not-yet-chosen indices. Deterministic given the seed.
std::vector<FeatureVector> kmeanspp_seed(std::span<const FeatureVector> points,
                                         size_t k, uint64_t seed);

struct LloydConfig {
  double tol = 1e-9;
  uint32_t max_iter = 100;
  // Thresholds default to mean + 2*std / mean + 4*std of the training
  // nearest-center distances; either can be pinned explicitly.
  double tau1_override = -1.0;
  double tau2_override = -1.0;
};

// Lloyd iterations from the given centers. Stops when the largest center
// movement drops below tol or max_iter is reached; an emptied cluster is
// re-seeded to the point farthest from its assigned center.
ClusterModel kmeans_cluster(std::span<const FeatureVector> points,
                            std::vector<FeatureVector> init_centers,
                            const LloydConfig& cfg = {});

DriftCase classify_drift(const FeatureVector& f, const ClusterModel& m);

// Indices whose case is Drifted or Novel, in input order. Known items are
// excluded from the training read.
std::vector<size_t> select_exemplars(std::span<const FeatureVector> features,
                                     const ClusterModel& m);

// --- Serialization ("SKMN") ---------------------------------------------------
// magic + version + k (u16) + dims (u16) + centers as f64 LE + tau1 + tau2.

inline constexpr uint8_t kModelVersion = 1;

Bytes serialize_model(const ClusterModel& m);
ClusterModel parse_model(std::span<const uint8_t> data);

}  // namespace salt::exemplar
