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

#include "salt/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "salt/archive.hpp"
#include "salt/autoenc.hpp"
#include "salt/crc32.hpp"
#include "salt/errors.hpp"
#include "salt/exemplar.hpp"
#include "salt/mulkern.hpp"
#include "salt/perfmodel.hpp"
#include "salt/rlwe.hpp"
#include "salt/storage.hpp"

namespace salt::cli {

namespace {

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string s = buf.str();
  return Bytes(s.begin(), s.end());
}

void write_file(const std::string& path, std::span<const uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write file: " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

struct Options {
  std::string in_path, out_path, pool_path, key_path, map_path, model_path,
      scenario_path;
  uint64_t seed = 0;
  uint32_t layers = 4;
  uint32_t base_step = 8;
  uint32_t anchor_interval = 16;
  uint32_t k_max = 0;  // 0 = all layers
  int parallelism = 1;
  uint32_t clusters = 4;
  double tau1 = -1.0, tau2 = -1.0;
  int drive = -1;
  bool wipe = true;
};

int cmd_keygen(const Options& o, std::ostream& out) {
  const rlwe::RingParams ring;
  const rlwe::KeyPair kp = rlwe::keygen(ring, o.seed);
  write_file(o.key_path, rlwe::serialize_keypair(kp, ring));
  out << "wrote key pair (n=" << ring.n << ", q=" << ring.q << ") to "
      << o.key_path << "\n";
  return kExitOk;
}

int cmd_archive(const Options& o, std::ostream& out) {
  // Load and validate everything before touching the pool.
  const auto frames = read_clip(o.in_path);
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::parse_keypair(read_file(o.key_path), ring);
  storage::PoolLayout layout = storage::PoolLayout::load_file(o.pool_path);

  archive::ArchiveParams params;
  params.codec.num_layers = o.layers;
  params.codec.base_step = o.base_step;
  params.codec.anchor_interval = o.anchor_interval;
  params.codec.validate();
  params.ring = ring;
  params.seed = o.seed;

  storage::DrivePool pool(layout);
  const archive::ArchiveResult res = archive::archive(frames, pool, keys, params);
  write_file(o.map_path.empty() ? o.out_path : o.map_path,
             res.map.serialize());
  pool.layout().save_file(o.pool_path);

  out << "archived " << frames.size() << " frames: raw "
      << res.stats.raw_bytes << " B, encoded " << res.stats.encoded_bytes
      << " B (ratio " << res.stats.codec_ratio() << "), encrypted "
      << res.stats.encrypted_bytes << " B (expansion "
      << res.stats.cipher_expansion() << "), " << res.map.stripes.size()
      << " stripes\n";
  return kExitOk;
}

int cmd_retrieve(const Options& o, std::ostream& out) {
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::parse_keypair(read_file(o.key_path), ring);
  const storage::StripeMap map = storage::StripeMap::parse(read_file(o.map_path));
  const storage::DrivePool pool(storage::PoolLayout::load_file(o.pool_path));

  exemplar::ClusterModel model;
  const bool with_model = !o.model_path.empty();
  if (with_model) model = exemplar::parse_model(read_file(o.model_path));

  const Bytes raw = storage::raid_read(pool, map, o.parallelism);
  const archive::ArchiveContainer container = archive::ArchiveContainer::parse(raw);
  const uint32_t k_max = o.k_max == 0 ? container.header.num_layers : o.k_max;
  const archive::RetrieveResult res = archive::retrieve_container(
      container, keys, k_max, with_model ? &model : nullptr);

  if (with_model) {
    for (size_t i = 0; i < res.tags.size(); ++i)
      out << "frame " << i << ": " << exemplar::to_string(res.tags[i]) << "\n";
    write_clip(o.out_path, res.exemplars);
    out << "retrieved " << res.frames.size() << " frames, wrote "
        << res.exemplars.size() << " exemplars to " << o.out_path << "\n";
  } else {
    write_clip(o.out_path, res.frames);
    out << "retrieved " << res.frames.size() << " frames to " << o.out_path
        << "\n";
  }
  return kExitOk;
}

int cmd_scrub(const Options& o, std::ostream& out) {
  const storage::StripeMap map = storage::StripeMap::parse(read_file(o.map_path));
  const storage::DrivePool pool(storage::PoolLayout::load_file(o.pool_path));
  storage::verify_stripes(pool, map);
  const Bytes raw = storage::raid_read(pool, map, o.parallelism);
  const archive::ArchiveContainer container = archive::ArchiveContainer::parse(raw);
  for (size_t i = 0; i < container.segments.size(); ++i) {
    const auto& e = container.segments[i];
    const auto seg = std::span(container.payload).subspan(e.offset, e.length);
    if (crc32(seg) != e.crc)
      throw DataError("segment " + std::to_string(i) + ": CRC mismatch");
  }
  out << "scrub OK: " << map.stripes.size() << " stripes, "
      << container.segments.size() << " segments\n";
  return kExitOk;
}

int cmd_fail(const Options& o, std::ostream& out) {
  storage::PoolLayout layout = storage::PoolLayout::load_file(o.pool_path);
  storage::DrivePool pool(layout);
  storage::Drive& d = pool.drive(static_cast<uint32_t>(o.drive));
  if (o.wipe) {
    // Simulate swapping in a blank replacement.
    const Bytes zeros(64 * 1024, 0);
    for (uint64_t off = 0; off < d.capacity(); off += zeros.size())
      d.raw_write(off, std::span(zeros).subspan(
                           0, std::min<uint64_t>(zeros.size(),
                                                 d.capacity() - off)));
  }
  pool.fail_drive(static_cast<uint32_t>(o.drive));
  pool.layout().save_file(o.pool_path);
  out << "drive " << o.drive << " marked failed\n";
  return kExitOk;
}

int cmd_rebuild(const Options& o, std::ostream& out) {
  const storage::PoolLayout layout = storage::PoolLayout::load_file(o.pool_path);
  storage::DrivePool pool(layout);
  storage::reconstruct(pool, static_cast<uint32_t>(o.drive));
  pool.layout().save_file(o.pool_path);
  out << "drive " << o.drive << " rebuilt from parity\n";
  return kExitOk;
}

int cmd_exemplar(const Options& o, std::ostream& out) {
  const auto frames = read_clip(o.in_path);
  const autoenc::FeatureExtractor ex =
      autoenc::make_extractor(archive::kDefaultExtractorSeed);
  std::vector<exemplar::FeatureVector> features;
  features.reserve(frames.size());
  for (const auto& f : frames)
    features.push_back(autoenc::extract_features(f, ex));

  if (!o.model_path.empty()) {
    const exemplar::ClusterModel model =
        exemplar::parse_model(read_file(o.model_path));
    for (size_t i = 0; i < features.size(); ++i)
      out << "frame " << i << ": "
          << exemplar::to_string(exemplar::classify_drift(features[i], model))
          << "\n";
    return kExitOk;
  }

  if (o.clusters > features.size())
    throw InvalidInput("cluster count exceeds frame count");
  auto centers = exemplar::kmeanspp_seed(features, o.clusters, o.seed);
  exemplar::LloydConfig cfg;
  cfg.tau1_override = o.tau1;
  cfg.tau2_override = o.tau2;
  const exemplar::ClusterModel model =
      exemplar::kmeans_cluster(features, std::move(centers), cfg);
  write_file(o.out_path, exemplar::serialize_model(model));
  out << "trained model: k=" << model.k() << ", tau1=" << model.tau1
      << ", tau2=" << model.tau2 << " -> " << o.out_path << "\n";
  return kExitOk;
}

int cmd_bench(std::ostream& out) {
  const rlwe::RingParams ring;
  std::vector<uint32_t> a(ring.n, 1), c(ring.n, 0);
  std::vector<int32_t> b(ring.n, 1);
  const auto res = mulkern::hspm_multiply(a, b, c, ring.q);
  out << "polynomial multiply (n=" << ring.n << "): load="
      << res.cycles.load << " compute=" << res.cycles.compute
      << " readout=" << res.cycles.readout << " total=" << res.cycles.total
      << " cycles\n";

  perf::AcceleratorConfig acc;
  acc.validate();
  out << "accelerator: " << acc.tiles << " tiles (" << acc.grid_rows << "x"
      << acc.grid_cols << "), filter " << acc.filter_banks << "x"
      << acc.filter_bank_bytes << " B, input SRAM " << acc.input_buffer_bytes
      << " B double-buffered (halves " << acc.input_buffer_half_bytes
      << " B), scratchpad " << acc.scratchpad_bytes << " B, state buffer "
      << acc.state_buffer_bytes << " B\n";

  const auto rate = perf::raw_rate(1920, 1080, 3, 4, 60);
  out << "raw 1080p60 RGBA stream: " << rate.mib_per_frame()
      << " MiB/frame, " << rate.gib_per_second() << " GiB/s, "
      << rate.tib_per_day() << " TiB/day\n";

  out << "conv iterations for a 64x3x3 kernel: "
      << perf::conv_iterations(64, 3, 3) << "\n";
  const auto [iters, cycles] = perf::input_load(32, 32, 3);
  out << "input staging for 32x32x3: " << iters << " iterations, " << cycles
      << " cycles per half-buffer\n";
  const uint64_t batch = perf::batch_size(64, 16);
  out << "batch size at 64 tiles / 16 channels: " << batch << "\n";
  if (perf::batch_size(64, 65) == 0)
    out << "batch size at 64 tiles / 65 channels: no batching possible\n";
  out << "redundancy overhead: raid5(4 drives)="
      << perf::redundancy_overhead(perf::RedundancyScheme::Raid5, 4)
      << " mirror=" << perf::redundancy_overhead(perf::RedundancyScheme::Mirror, 2)
      << "\n";
  return kExitOk;
}

int cmd_model(const Options& o, std::ostream& out) {
  perf::PlacementParams params;
  std::vector<perf::PlacementScenario> scenarios = perf::default_scenarios();
  if (!o.scenario_path.empty()) {
    const Bytes text = read_file(o.scenario_path);
    std::tie(params, scenarios) =
        perf::parse_scenario_file(std::string(text.begin(), text.end()));
  }
  const std::string report = perf::placement_report(scenarios, params);
  if (!o.out_path.empty()) {
    write_file(o.out_path, Bytes(report.begin(), report.end()));
    out << "wrote placement report to " << o.out_path << "\n";
  } else {
    out << report;
  }
  return kExitOk;
}

}  // namespace

std::vector<codec::Frame> read_clip(const std::string& path) {
  return decode_clip(read_file(path));
}

void write_clip(const std::string& path,
                const std::vector<codec::Frame>& frames) {
  write_file(path, encode_clip(frames));
}

Bytes encode_clip(const std::vector<codec::Frame>& frames) {
  ByteWriter w;
  const uint16_t width = frames.empty() ? 0 : frames[0].width;
  const uint16_t height = frames.empty() ? 0 : frames[0].height;
  w.u16(width);
  w.u16(height);
  w.u32(static_cast<uint32_t>(frames.size()));
  for (const codec::Frame& f : frames) {
    if (f.width != width || f.height != height)
      throw InvalidInput("clip frames must share dimensions");
    w.bytes(f.samples);
  }
  return w.take();
}

std::vector<codec::Frame> decode_clip(std::span<const uint8_t> data) {
  ByteReader r(data);
  const uint16_t width = r.u16();
  const uint16_t height = r.u16();
  const uint32_t count = r.u32();
  if (width == 0 || height == 0) throw DecodeError("clip dimensions are zero");
  std::vector<codec::Frame> frames;
  frames.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    codec::Frame f(width, height);
    const auto s = r.bytes(f.pixel_count());
    std::copy(s.begin(), s.end(), f.samples.begin());
    frames.push_back(std::move(f));
  }
  if (!r.done()) throw DecodeError("clip trailing bytes");
  return frames;
}

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"archival pipeline for continuous-learning edge storage"};
  app.require_subcommand(1);

  Options o;

  auto* keygen = app.add_subcommand("keygen", "generate an encryption key pair");
  keygen->add_option("--seed", o.seed, "generator seed");
  keygen->add_option("--out", o.key_path, "output key file")->required();

  auto* arch = app.add_subcommand("archive", "encode, encrypt and stripe a clip");
  arch->add_option("--in", o.in_path, "input clip")->required();
  arch->add_option("--pool", o.pool_path, "pool layout file")->required();
  arch->add_option("--key", o.key_path, "key file")->required();
  arch->add_option("--out", o.out_path, "output stripe map")->required();
  arch->add_option("--layers", o.layers, "number of residual layers");
  arch->add_option("--base-step", o.base_step, "coarsest quantizer step");
  arch->add_option("--anchor-interval", o.anchor_interval, "frames per group");
  arch->add_option("--seed", o.seed, "encryption stream seed");

  auto* retr = app.add_subcommand("retrieve", "gather, decrypt and decode a clip");
  retr->add_option("--pool", o.pool_path, "pool layout file")->required();
  retr->add_option("--map", o.map_path, "stripe map file")->required();
  retr->add_option("--key", o.key_path, "key file")->required();
  retr->add_option("--out", o.out_path, "output clip")->required();
  retr->add_option("--kmax", o.k_max, "layers to decode (default: all)");
  retr->add_option("--parallel", o.parallelism, "outstanding read batch size");
  retr->add_option("--model", o.model_path, "cluster model for exemplar selection");

  auto* scrub = app.add_subcommand("scrub", "verify parity and segment checksums");
  scrub->add_option("--pool", o.pool_path, "pool layout file")->required();
  scrub->add_option("--map", o.map_path, "stripe map file")->required();
  scrub->add_option("--parallel", o.parallelism, "outstanding read batch size");

  auto* fail = app.add_subcommand("fail", "mark a drive as failed");
  bool keep_data = false;
  fail->add_option("--pool", o.pool_path, "pool layout file")->required();
  fail->add_option("--drive", o.drive, "drive id")->required();
  fail->add_flag("--keep-data", keep_data,
                 "keep the block store instead of blanking it");

  auto* rebuild = app.add_subcommand("rebuild", "reconstruct a failed drive");
  rebuild->add_option("--pool", o.pool_path, "pool layout file")->required();
  rebuild->add_option("--drive", o.drive, "drive id")->required();

  auto* exem = app.add_subcommand("exemplar", "train or apply a cluster model");
  exem->add_option("--in", o.in_path, "input clip")->required();
  exem->add_option("--out", o.out_path, "output model file");
  exem->add_option("--model", o.model_path, "existing model to classify against");
  exem->add_option("--k", o.clusters, "cluster count");
  exem->add_option("--seed", o.seed, "seeding RNG seed");
  exem->add_option("--tau1", o.tau1, "known/drifted distance threshold");
  exem->add_option("--tau2", o.tau2, "drifted/novel distance threshold");

  auto* bench = app.add_subcommand("bench", "print kernel and sizing figures");
  (void)bench;

  auto* model = app.add_subcommand("model", "placement latency report");
  model->add_option("--scenario", o.scenario_path, "scenario file");
  model->add_option("--out", o.out_path, "write the CSV report here");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  o.wipe = !keep_data;

  try {
    if (keygen->parsed()) return cmd_keygen(o, out);
    if (arch->parsed()) return cmd_archive(o, out);
    if (retr->parsed()) return cmd_retrieve(o, out);
    if (scrub->parsed()) return cmd_scrub(o, out);
    if (fail->parsed()) return cmd_fail(o, out);
    if (rebuild->parsed()) return cmd_rebuild(o, out);
    if (exem->parsed()) return cmd_exemplar(o, out);
    if (bench->parsed()) return cmd_bench(out);
    if (model->parsed()) return cmd_model(o, out);
    err << "usage error: no command\n";
    return kExitUsage;
  } catch (const InvalidInput& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const DecodeError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace salt::cli
