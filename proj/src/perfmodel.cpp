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

#include "salt/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "salt/errors.hpp"

namespace salt::perf {

void AcceleratorConfig::validate() const {
  if (tiles != grid_rows * grid_cols)
    throw InvalidInput("tile count must equal the grid product");
}

namespace {

uint64_t ceil_div(uint64_t num, uint64_t den) {
  return num / den + (num % den != 0);
}

uint64_t checked_volume(uint64_t a, uint64_t b, uint64_t c) {
  if (a == 0 || b == 0 || c == 0)
    throw InvalidInput("dimensions must be positive");
  const unsigned __int128 v =
      static_cast<unsigned __int128>(a) * b * c;
  if (v > UINT64_MAX) throw InvalidInput("dimension product overflows");
  return static_cast<uint64_t>(v);
}

}  // namespace

uint64_t conv_iterations(uint64_t c, uint64_t h, uint64_t w) {
  return ceil_div(checked_volume(c, h, w), 64);
}

std::pair<uint64_t, uint64_t> input_load(uint64_t x, uint64_t y, uint64_t z) {
  const uint64_t volume = checked_volume(x, y, z);
  return {ceil_div(volume, 1024), ceil_div(volume, 2048)};
}

uint64_t batch_size(uint64_t active_tiles, uint64_t min_channels) {
  if (active_tiles == 0) throw InvalidInput("active tile count must be positive");
  if (min_channels == 0) throw InvalidInput("minimum channel count must be positive");
  return active_tiles / min_channels;
}

RawRate raw_rate(uint64_t width, uint64_t height, uint64_t channels,
                 uint64_t bytes_per_sample, uint64_t fps) {
  if (width == 0 || height == 0 || channels == 0 || bytes_per_sample == 0 ||
      fps == 0)
    throw InvalidInput("raw_rate arguments must be positive");
  RawRate r;
  r.bytes_per_frame = static_cast<double>(width) * height * channels *
                      bytes_per_sample;
  r.bytes_per_second = r.bytes_per_frame * fps;
  r.bytes_per_day = r.bytes_per_second * 86400.0;
  return r;
}

double redundancy_overhead(RedundancyScheme scheme, uint32_t drive_count) {
  switch (scheme) {
    case RedundancyScheme::Mirror:
      return 1.0;
    case RedundancyScheme::Raid5:
      if (drive_count < 3)
        throw InvalidInput("RAID-5 needs at least three drives");
      return 1.0 / (drive_count - 1);
  }
  throw InvalidInput("unknown redundancy scheme");
}

void PlacementScenario::validate() const {
  if (shares.empty()) throw InvalidInput("placement scenario has no shares");
  double total = 0.0;
  for (const auto& s : shares) {
    if (s.fraction <= 0.0) throw InvalidInput("share fractions must be positive");
    if (s.executor.empty()) throw InvalidInput("share executor must be named");
    total += s.fraction;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidInput("share fractions must sum to 1");
}

void PlacementParams::validate() const {
  if (payload_bytes <= 0 || work_units < 0 || host_bw <= 0 || internal_bw <= 0 ||
      host_rate <= 0 || csd_rate <= 0)
    throw InvalidInput("placement parameters must be positive");
}

PlacementResult placement_latency(const PlacementScenario& s,
                                  const PlacementParams& p) {
  s.validate();
  p.validate();

  // Per-executor time; executors work in parallel, so the scenario finishes
  // with its slowest one.
  std::map<std::string, double> time;
  for (const auto& share : s.shares) {
    const bool host = share.executor == "host";
    const double bw = host ? p.host_bw : p.internal_bw;
    const double rate = host ? p.host_rate : p.csd_rate;
    time[share.executor] += share.fraction * (p.payload_bytes / bw) +
                            share.fraction * (p.work_units / rate);
  }
  double latency = 0.0;
  for (const auto& [_, t] : time) latency = std::max(latency, t);

  const double baseline =
      p.payload_bytes / p.host_bw + p.work_units / p.host_rate;
  return {latency, baseline / latency};
}

std::vector<PlacementScenario> default_scenarios() {
  return {
      {"all_host", {{"host", 1.0}}},
      {"csd1_full", {{"csd1", 1.0}}},
      {"split_10_90", {{"csd1", 0.1}, {"csd2", 0.9}}},
      {"split_30_70", {{"csd1", 0.3}, {"csd2", 0.7}}},
      {"split_40_60", {{"csd1", 0.4}, {"csd2", 0.6}}},
      {"split_50_50", {{"csd1", 0.5}, {"csd2", 0.5}}},
  };
}

std::pair<PlacementParams, std::vector<PlacementScenario>> parse_scenario_file(
    const std::string& text) {
  PlacementParams params;
  std::vector<PlacementScenario> scenarios;

  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("scenario file: expected key=value, got '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);

    if (key == "payload_bytes") params.payload_bytes = std::stod(value);
    else if (key == "work_units") params.work_units = std::stod(value);
    else if (key == "host_bw") params.host_bw = std::stod(value);
    else if (key == "internal_bw") params.internal_bw = std::stod(value);
    else if (key == "host_rate") params.host_rate = std::stod(value);
    else if (key == "csd_rate") params.csd_rate = std::stod(value);
    else if (key == "scenario") {
      // scenario=<name>:<executor>=<fraction>[,<executor>=<fraction>...]
      const auto colon = value.find(':');
      if (colon == std::string::npos)
        throw InvalidInput("scenario file: missing ':' in scenario line");
      PlacementScenario s;
      s.name = value.substr(0, colon);
      std::istringstream shares(value.substr(colon + 1));
      std::string part;
      while (std::getline(shares, part, ',')) {
        const auto peq = part.find('=');
        if (peq == std::string::npos)
          throw InvalidInput("scenario file: bad share '" + part + "'");
        s.shares.push_back({part.substr(0, peq), std::stod(part.substr(peq + 1))});
      }
      s.validate();
      scenarios.push_back(std::move(s));
    } else {
      throw InvalidInput("scenario file: unknown key '" + key + "'");
    }
  }
  params.validate();
  if (scenarios.empty()) scenarios = default_scenarios();
  return {params, scenarios};
}

std::string placement_report(const std::vector<PlacementScenario>& scenarios,
                             const PlacementParams& params) {
  std::ostringstream out;
  out << "scenario,latency_s,speedup\n";
  for (const auto& s : scenarios) {
    const PlacementResult r = placement_latency(s, params);
    out << s.name << ',' << r.latency << ',' << r.speedup << '\n';
  }
  return out.str();
}

}  // namespace salt::perf
