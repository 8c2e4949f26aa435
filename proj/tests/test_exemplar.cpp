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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "salt/errors.hpp"
#include "salt/exemplar.hpp"
#include "support/oracles.hpp"

using namespace salt;
using namespace salt::exemplar;

namespace {

std::vector<FeatureVector> line_points() {
  return {{0.0}, {1.0}, {10.0}, {11.0}};
}

ClusterModel simple_model() {
  ClusterModel m;
  m.centers = {{0.0, 0.0}, {10.0, 0.0}};
  m.tau1 = 1.0;
  m.tau2 = 3.0;
  return m;
}

}  // namespace

TEST_CASE("kmeanspp_seed: k equal to point count returns a permutation") {
  const auto pts = line_points();
  const auto centers = kmeanspp_seed(pts, pts.size(), 5);
  REQUIRE(centers.size() == pts.size());
  std::multiset<double> got, want;
  for (const auto& c : centers) got.insert(c[0]);
  for (const auto& p : pts) want.insert(p[0]);
  CHECK(got == want);
}

TEST_CASE("kmeanspp_seed: duplicate-only datasets fall back to uniform") {
  const std::vector<FeatureVector> pts(6, FeatureVector{3.0, 3.0});
  const auto centers = kmeanspp_seed(pts, 4, 9);
  REQUIRE(centers.size() == 4);
  for (const auto& c : centers) CHECK(c == FeatureVector{3.0, 3.0});
}

TEST_CASE("kmeanspp_seed: k larger than the point count is rejected") {
  const auto pts = line_points();
  CHECK_THROWS_AS(kmeanspp_seed(pts, 5, 0), InvalidInput);
  CHECK_THROWS_AS(kmeanspp_seed({}, 1, 0), InvalidInput);
}

TEST_CASE("kmeanspp_seed: {0,1,10,11} splits the pairs in >= 97% of runs") {
  const auto pts = line_points();
  const int runs = 10000;
  int split = 0;
  for (int seed = 0; seed < runs; ++seed) {
    const auto centers = kmeanspp_seed(pts, 2, seed);
    const bool a_low = centers[0][0] < 5.0;
    const bool b_low = centers[1][0] < 5.0;
    split += a_low != b_low;
  }
  // Exact D^2 arithmetic puts each case above 99.5%; 97% leaves slack for
  // the seeding noise.
  CHECK(split >= runs * 97 / 100);
}

TEST_CASE("kmeanspp_seed: second pick follows the D^2 weights") {
  const auto pts = line_points();
  const int runs = 10000;
  // Conditioned on the first pick, count where the second lands.
  std::map<int, std::map<int, int>> counts;
  std::map<int, int> firsts;
  for (int seed = 0; seed < runs; ++seed) {
    const auto centers = kmeanspp_seed(pts, 2, seed);
    int f = -1, s = -1;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (pts[i][0] == centers[0][0] && f < 0) f = static_cast<int>(i);
      if (pts[i][0] == centers[1][0] && s < 0) s = static_cast<int>(i);
    }
    // Duplicate values don't occur in this set, so the mapping is unique.
    ++counts[f][s];
    ++firsts[f];
  }
  // First pick 0: D^2 masses for {1, 10, 11} are {1, 100, 121} / 222.
  const double probs0[] = {0.0, 1.0 / 222, 100.0 / 222, 121.0 / 222};
  const int n0 = firsts[0];
  REQUIRE(n0 > 1000);
  for (int second = 1; second < 4; ++second) {
    const double expect = n0 * probs0[second];
    const double sigma = std::sqrt(n0 * probs0[second] * (1 - probs0[second]));
    CHECK(std::abs(counts[0][second] - expect) <= 3 * sigma + 1);
  }
}

TEST_CASE("kmeans_cluster: points already at centers converge immediately") {
  const std::vector<FeatureVector> pts = {{0.0, 0.0}, {5.0, 5.0}};
  const ClusterModel m = kmeans_cluster(pts, {pts[0], pts[1]});
  CHECK(m.lloyd_cost_trace.size() == 1);
  CHECK(m.lloyd_cost_trace[0] == 0.0);
  CHECK(m.centers[0] == pts[0]);
  CHECK(m.centers[1] == pts[1]);
}

TEST_CASE("kmeans_cluster: {0,1,10,11} reaches the brute-force optimum") {
  const auto pts = line_points();
  const ClusterModel m = kmeans_cluster(pts, kmeanspp_seed(pts, 2, 1));
  std::vector<double> got = {m.centers[0][0], m.centers[1][0]};
  std::sort(got.begin(), got.end());
  CHECK(got[0] == doctest::Approx(0.5));
  CHECK(got[1] == doctest::Approx(10.5));
  CHECK(m.lloyd_cost_trace.back() == doctest::Approx(1.0));
  CHECK(oracles::kmeans_optimal_cost(pts, 2) == doctest::Approx(1.0));
}

TEST_CASE("kmeans_cluster: single point, k = 1") {
  const std::vector<FeatureVector> pts = {{2.5, -1.0}};
  const ClusterModel m = kmeans_cluster(pts, {pts[0]});
  CHECK(m.centers[0] == pts[0]);
  CHECK(m.stats[0].count == 1);
}

TEST_CASE("kmeans_cluster: Lloyd cost never increases") {
  SplitMix64 rng(21);
  std::vector<FeatureVector> pts;
  for (int i = 0; i < 60; ++i)
    pts.push_back({rng.next_double() * 10, rng.next_double() * 10});
  const ClusterModel m = kmeans_cluster(pts, kmeanspp_seed(pts, 4, 3));
  for (size_t i = 1; i < m.lloyd_cost_trace.size(); ++i)
    CHECK(m.lloyd_cost_trace[i] <= m.lloyd_cost_trace[i - 1] + 1e-12);
}

TEST_CASE("kmeans_cluster: best of ten restarts matches brute force") {
  // Several small instances, the acceptance suite runs the full set.
  SplitMix64 rng(33);
  for (int inst = 0; inst < 4; ++inst) {
    std::vector<FeatureVector> pts;
    const size_t n = 5 + inst;
    for (size_t i = 0; i < n; ++i)
      pts.push_back({rng.next_double() * 4, rng.next_double() * 4});
    const size_t k = 2 + inst % 2;
    double best = 1e300;
    for (uint64_t restart = 0; restart < 10; ++restart) {
      const ClusterModel m =
          kmeans_cluster(pts, kmeanspp_seed(pts, k, restart));
      best = std::min(best, m.lloyd_cost_trace.back());
    }
    CHECK(best <= oracles::kmeans_optimal_cost(pts, k) + 1e-9);
  }
}

TEST_CASE("classify_drift: the three cases partition distance space") {
  const ClusterModel m = simple_model();
  CHECK(classify_drift({0.0, 0.0}, m) == DriftCase::Known);       // d = 0
  CHECK(classify_drift({0.0, 2.0}, m) == DriftCase::Drifted);     // tau1 < d <= tau2
  CHECK(classify_drift({0.0, 30.0}, m) == DriftCase::Novel);      // d > 10*tau2? far out
  CHECK(classify_drift({0.0, 1.0}, m) == DriftCase::Known);       // d == tau1
  CHECK(classify_drift({0.0, 3.0}, m) == DriftCase::Drifted);     // d == tau2
  CHECK(classify_drift({10.0, 0.5}, m) == DriftCase::Known);      // nearest = center 1
}

TEST_CASE("classify_drift: exactly one case for random distances") {
  const ClusterModel m = simple_model();
  SplitMix64 rng(44);
  for (int i = 0; i < 200; ++i) {
    const FeatureVector f = {rng.next_double() * 20 - 5, rng.next_double() * 20 - 5};
    const DriftCase c = classify_drift(f, m);
    const double d = nearest_center(f, m).second;
    const bool known = d <= m.tau1;
    const bool drifted = d > m.tau1 && d <= m.tau2;
    const bool novel = d > m.tau2;
    CHECK(static_cast<int>(known) + static_cast<int>(drifted) +
              static_cast<int>(novel) == 1);
    if (known) CHECK(c == DriftCase::Known);
    if (drifted) CHECK(c == DriftCase::Drifted);
    if (novel) CHECK(c == DriftCase::Novel);
  }
}

TEST_CASE("select_exemplars: exactly the non-known indices, in order") {
  const ClusterModel m = simple_model();
  const std::vector<FeatureVector> features = {
      {0.0, 0.0},    // known
      {0.0, 2.0},    // drifted
      {10.0, 0.0},   // known
      {0.0, 50.0},   // novel
      {10.0, 2.5},   // drifted
  };
  const auto idx = select_exemplars(features, m);
  CHECK(idx == std::vector<size_t>{1, 3, 4});
  for (size_t i = 0; i < features.size(); ++i) {
    const bool selected = std::find(idx.begin(), idx.end(), i) != idx.end();
    CHECK(selected == (classify_drift(features[i], m) != DriftCase::Known));
  }
}

TEST_CASE("select_exemplars: all-known and empty inputs") {
  const ClusterModel m = simple_model();
  const std::vector<FeatureVector> at_centers = {{0.0, 0.0}, {10.0, 0.0}};
  CHECK(select_exemplars(at_centers, m).empty());
  CHECK(select_exemplars({}, m).empty());
}

TEST_CASE("model serialization: round-trip and corruption") {
  const auto pts = line_points();
  const ClusterModel m = kmeans_cluster(pts, kmeanspp_seed(pts, 2, 7));
  const Bytes b = serialize_model(m);
  const ClusterModel back = parse_model(b);
  CHECK(back.centers == m.centers);
  CHECK(back.tau1 == m.tau1);
  CHECK(back.tau2 == m.tau2);

  Bytes truncated(b.begin(), b.begin() + b.size() - 3);
  CHECK_THROWS_AS(parse_model(truncated), DecodeError);
}

TEST_CASE("cluster model: threshold invariants hold even when degenerate") {
  const std::vector<FeatureVector> pts = {{1.0}, {1.0}, {1.0}};
  const ClusterModel m = kmeans_cluster(pts, kmeanspp_seed(pts, 1, 0));
  CHECK(m.tau1 > 0.0);
  CHECK(m.tau2 > m.tau1);
  CHECK(classify_drift({1.0}, m) == DriftCase::Known);
}
