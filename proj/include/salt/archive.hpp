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
#include <optional>
#include <span>
#include <vector>

#include "salt/autoenc.hpp"
#include "salt/codec.hpp"
#include "salt/exemplar.hpp"
#include "salt/rlwe.hpp"
#include "salt/storage.hpp"

namespace salt::archive {

// Default seed for the frozen read-path feature extractor. Archive writers
// and readers must agree on it for drift tags to be comparable.
inline constexpr uint64_t kDefaultExtractorSeed = 0;

struct ArchiveParams {
  codec::CodecParams codec;
  rlwe::RingParams ring;
  uint64_t seed = 0;  // master seed for the per-block encryption streams
};

struct SegmentEntry {
  uint64_t offset = 0;  // relative to the payload region
  uint64_t length = 0;
  uint32_t crc = 0;
};

// On-disk container: "SALT" + version + header fields + segment table +
// encrypted group payloads. See docs/FORMATS.md for the exact byte layout.
struct ContainerHeader {
  uint16_t width = 0;
  uint16_t height = 0;
  uint32_t frame_count = 0;
  uint8_t num_layers = 0;
  uint8_t anchor_interval = 0;
  uint16_t ring_n = 0;
  uint16_t ring_q = 0;
  rlwe::KeyId key_id{};
  uint32_t stripe_size = 0;
  uint8_t drive_count = 0;
  uint8_t parity_scheme = 5;  // RAID level
};

struct ArchiveContainer {
  ContainerHeader header;
  std::vector<SegmentEntry> segments;
  Bytes payload;

  Bytes serialize() const;
  static ArchiveContainer parse(std::span<const uint8_t> data);
};

struct PoolGeometry {
  uint32_t stripe_size = storage::kDefaultStripeSize;
  uint8_t drive_count = 0;
};

// Sizes seen at each stage of the write path. Encryption costs a fixed
// expansion: every 32-byte plaintext block becomes two packed polynomials.
struct ArchiveStats {
  uint64_t raw_bytes = 0;
  uint64_t encoded_bytes = 0;    // serialized groups, before encryption
  uint64_t encrypted_bytes = 0;  // container payload

  double codec_ratio() const {
    return raw_bytes ? static_cast<double>(encoded_bytes) / raw_bytes : 0.0;
  }
  double cipher_expansion() const {
    return encoded_bytes ? static_cast<double>(encrypted_bytes) / encoded_bytes
                         : 0.0;
  }
};

// Durable staging area for completed segments; survives a simulated power
// loss together with the checkpoint.
struct ArchiveStaging {
  std::vector<Bytes> segments;

  uint64_t total_bytes() const;
  uint32_t digest() const;
};

// Resumable write path. Each step encodes one frame group, encrypts it and
// appends the segment to the staging area, then refreshes the checkpoint.
// Restarting from (checkpoint, staging) continues exactly where the lost
// run stopped and produces a byte-identical container.
class ArchiveJob {
 public:
  ArchiveJob(std::span<const codec::Frame> frames, const ArchiveParams& params,
             const rlwe::PublicKey& pk, const PoolGeometry& geometry);

  static ArchiveJob resume(std::span<const codec::Frame> frames,
                           const ArchiveParams& params,
                           const rlwe::PublicKey& pk,
                           const PoolGeometry& geometry,
                           const storage::CheckpointState& checkpoint,
                           ArchiveStaging staging);

  size_t group_count() const { return group_count_; }
  size_t groups_done() const { return staging_.segments.size(); }
  bool finished() const { return groups_done() == group_count_; }

  // Processes the next group; returns false when nothing remains.
  bool step();

  const storage::CheckpointState& checkpoint() const { return checkpoint_; }
  const ArchiveStaging& staging() const { return staging_; }
  ArchiveStaging take_staging() { return std::move(staging_); }
  const ArchiveStats& stats() const { return stats_; }

  ArchiveContainer finish() const;

 private:
  void refresh_checkpoint(uint8_t stage);

  std::vector<codec::Frame> frames_;
  ArchiveParams params_;
  rlwe::PublicKey pk_;
  rlwe::KeyId key_id_;
  PoolGeometry geometry_;
  size_t group_count_ = 0;
  uint64_t block_counter_ = 0;
  ArchiveStaging staging_;
  ArchiveStats stats_;
  storage::CheckpointState checkpoint_;
};

// Checkpoint stage tags.
inline constexpr uint8_t kStageGroupComplete = 1;
inline constexpr uint8_t kStageFinished = 2;

struct ArchiveResult {
  ArchiveContainer container;
  storage::StripeMap map;
  ArchiveStats stats;
};

// Full write path: encode -> encrypt -> stripe. The container lands in the
// pool via raid_write; the returned map locates it.
ArchiveResult archive(std::span<const codec::Frame> frames,
                      storage::DrivePool& pool, const rlwe::KeyPair& keys,
                      const ArchiveParams& params);

struct RetrieveResult {
  std::vector<codec::Frame> frames;  // every decoded frame
  std::vector<exemplar::DriftCase> tags;
  std::vector<size_t> exemplar_indices;
  std::vector<codec::Frame> exemplars;  // drifted or novel frames only
};

// Read path: gather -> CRC check -> decrypt -> inflate -> exemplar-select.
// Segment CRCs cover the ciphertext, so a wrong key surfaces as a group
// parse failure, not an integrity error. Without a model every frame is
// returned untagged.
RetrieveResult retrieve(const storage::DrivePool& pool,
                        const storage::StripeMap& map,
                        const rlwe::KeyPair& keys, uint32_t k_max,
                        const exemplar::ClusterModel* model = nullptr,
                        int parallelism = 1,
                        uint64_t extractor_seed = kDefaultExtractorSeed);

// Read path from already-gathered container bytes.
RetrieveResult retrieve_container(const ArchiveContainer& container,
                                  const rlwe::KeyPair& keys, uint32_t k_max,
                                  const exemplar::ClusterModel* model = nullptr,
                                  uint64_t extractor_seed = kDefaultExtractorSeed);

// Per-block encryption seed: block i uses mix64(seed ^ mix64(i + 1)).
uint64_t block_seed(uint64_t master_seed, uint64_t block_index);

// Encrypts a padded byte stream as consecutive 256-bit blocks; the inverse
// needs the block count implied by the ciphertext length.
Bytes encrypt_blocks(std::span<const uint8_t> plain, const rlwe::PublicKey& pk,
                     const rlwe::RingParams& params, uint64_t master_seed,
                     uint64_t& block_counter);
Bytes decrypt_blocks(std::span<const uint8_t> cipher, const rlwe::SignedPoly& s,
                     const rlwe::RingParams& params);

// Packed size of one ciphertext block: two polynomials of n 13-bit
// coefficients each.
size_t cipher_block_bytes(const rlwe::RingParams& params);

}  // namespace salt::archive
