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
#include <string>
#include <utility>
#include <vector>

namespace salt::perf {

// Fixed geometry of the modeled systolic feature-extraction accelerator.
// The input SRAM is recorded with both its total size and its per-half
// size; the two are independent configuration figures and are not required
// to reconcile.
struct AcceleratorConfig {
  uint32_t tiles = 64;
  uint32_t grid_rows = 8;
  uint32_t grid_cols = 8;
  uint32_t filter_banks = 64;
  uint32_t filter_bank_bytes = 1024;
  uint32_t input_buffer_bytes = 64 * 1024;  // double-buffered
  uint32_t input_buffer_half_bytes = 16 * 1024;
  uint32_t output_bank_bytes = 1024;
  uint32_t scratchpad_bytes = 64 * 1024;
  uint32_t state_buffer_bytes = 1024;

  void validate() const;  // tile count must equal the grid product
};

// ceil(C*H*W / tiles): one kernel per tile, iterated over the kernel volume.
uint64_t conv_iterations(uint64_t c, uint64_t h, uint64_t w);

// Input staging: (ceil(XYZ/1024) buffer iterations, ceil(XYZ/2048) loading
// cycles per half).
std::pair<uint64_t, uint64_t> input_load(uint64_t x, uint64_t y, uint64_t z);

// floor(active_tiles / min_channels); 0 means no batching is possible.
uint64_t batch_size(uint64_t active_tiles, uint64_t min_channels);

struct RawRate {
  double bytes_per_frame = 0.0;
  double bytes_per_second = 0.0;
  double bytes_per_day = 0.0;

  double mib_per_frame() const { return bytes_per_frame / (1024.0 * 1024.0); }
  double gib_per_second() const {
    return bytes_per_second / (1024.0 * 1024.0 * 1024.0);
  }
  double tib_per_day() const {
    return bytes_per_day / (1024.0 * 1024.0 * 1024.0 * 1024.0);
  }
};

RawRate raw_rate(uint64_t width, uint64_t height, uint64_t channels,
                 uint64_t bytes_per_sample, uint64_t fps);

enum class RedundancyScheme { Raid5, Mirror };

// Extra-storage ratio: RAID-5 costs 1/(N-1), mirroring 1.0.
double redundancy_overhead(RedundancyScheme scheme, uint32_t drive_count);

// --- Placement model ------------------------------------------------------------

// A fraction of the payload processed by one executor. Executor "host"
// pulls its share across the host I/O link and computes at the host rate;
// any other name is a drive-local executor using the internal bandwidth
// and drive compute rate. Executors run in parallel.
struct PlacementShare {
  std::string executor;
  double fraction = 0.0;
};

struct PlacementScenario {
  std::string name;
  std::vector<PlacementShare> shares;  // fractions must sum to 1

  void validate() const;
};

struct PlacementParams {
  double payload_bytes = 1e9;
  double work_units = 2e8;
  double host_bw = 2e9;      // bytes/s across the host I/O link
  double internal_bw = 8e9;  // bytes/s drive-internal
  double host_rate = 1e9;    // work units/s
  double csd_rate = 1e9;

  void validate() const;
};

struct PlacementResult {
  double latency = 0.0;
  double speedup = 0.0;  // against the all-host baseline
};

PlacementResult placement_latency(const PlacementScenario& s,
                                  const PlacementParams& p);

// The six-row reference table: all-host, one drive, then 0.1/0.9 through
// 0.5/0.5 splits across two drives. Speedups increase strictly down the
// table whenever internal bandwidth beats the host link.
std::vector<PlacementScenario> default_scenarios();

// Scenario files are key=value lines; see docs/FORMATS.md. Returns the
// parameters and the scenario list.
std::pair<PlacementParams, std::vector<PlacementScenario>> parse_scenario_file(
    const std::string& text);

// Comma-separated report: scenario, latency, speedup.
std::string placement_report(const std::vector<PlacementScenario>& scenarios,
                             const PlacementParams& params);

}  // namespace salt::perf
