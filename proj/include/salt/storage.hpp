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

#include <array>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "salt/bytes.hpp"

namespace salt::storage {

inline constexpr uint32_t kBlockSize = 4096;
inline constexpr uint32_t kDefaultStripeSize = 64 * 1024;

enum class DriveKind : uint8_t { Plain = 0, Csd = 1 };

struct DriveConfig {
  uint32_t id = 0;
  DriveKind kind = DriveKind::Plain;
  uint64_t capacity = 0;      // bytes, multiple of the stripe size
  std::string backing_path;   // empty = memory-backed
  bool failed = false;
};

struct PoolLayout {
  uint32_t stripe_size = kDefaultStripeSize;
  uint64_t next_row = 0;  // allocation cursor, advanced by writes
  std::vector<DriveConfig> drives;

  void validate() const;
  std::string to_text() const;
  static PoolLayout parse(const std::string& text);
  static PoolLayout load_file(const std::string& path);
  void save_file(const std::string& path) const;
};

// One simulated drive: a flat byte store addressed in 4 KiB blocks, backed
// by memory or a file. CSD drives additionally own a compute-local buffer
// that transfers land in.
class Drive {
 public:
  Drive(const DriveConfig& cfg);
  ~Drive();

  uint32_t id() const { return cfg_.id; }
  DriveKind kind() const { return cfg_.kind; }
  uint64_t capacity() const { return cfg_.capacity; }
  const DriveConfig& config() const { return cfg_; }
  bool failed() const { return cfg_.failed; }
  void set_failed(bool f) { cfg_.failed = f; }

  // Reads/writes bypass the failed flag only for rebuild; normal access
  // throws DataError when the drive is marked failed.
  void read(uint64_t offset, std::span<uint8_t> out) const;
  void write(uint64_t offset, std::span<const uint8_t> data);
  void raw_read(uint64_t offset, std::span<uint8_t> out) const;
  void raw_write(uint64_t offset, std::span<const uint8_t> data);

  Bytes& csd_buffer() { return csd_buffer_; }

 private:
  DriveConfig cfg_;
  mutable Bytes mem_;            // memory-backed store
  mutable std::unique_ptr<std::FILE, int (*)(std::FILE*)> file_;
  Bytes csd_buffer_;
};

// Chunk location inside the pool: a contiguous byte range on one drive.
struct ChunkLoc {
  uint32_t drive_id = 0;
  uint64_t offset = 0;
  uint32_t length = 0;  // meaningful bytes; storage is padded to the stripe size
};

struct StripeInfo {
  uint32_t index = 0;        // stripe ordinal within the object
  uint64_t row = 0;          // pool row (same byte range on every drive)
  uint32_t parity_drive = 0;
  std::vector<ChunkLoc> data;  // in payload order
  ChunkLoc parity;
};

struct StripeMap {
  uint64_t object_id = 0;
  uint64_t total_length = 0;
  uint32_t stripe_size = 0;
  std::vector<StripeInfo> stripes;

  Bytes serialize() const;  // "SMAP"
  static StripeMap parse(std::span<const uint8_t> data);
};

class DrivePool {
 public:
  // Opens every drive in the layout. RAID-5 requires at least three drives
  // with unique ids; capacities must be stripe-aligned.
  explicit DrivePool(const PoolLayout& layout);

  uint32_t stripe_size() const { return stripe_size_; }
  size_t drive_count() const { return drives_.size(); }
  uint64_t next_row() const { return next_row_; }
  void set_next_row(uint64_t row) { next_row_ = row; }

  Drive& drive(uint32_t id);
  const Drive& drive(uint32_t id) const;
  Drive& drive_at(size_t index) { return *drives_[index]; }
  const Drive& drive_at(size_t index) const { return *drives_[index]; }

  void fail_drive(uint32_t id);
  size_t failed_count() const;

  // Snapshot of the layout with the current failed flags and row cursor.
  PoolLayout layout() const;

 private:
  uint32_t stripe_size_ = 0;
  uint64_t next_row_ = 0;
  std::vector<std::unique_ptr<Drive>> drives_;
  std::map<uint32_t, size_t> by_id_;
};

// Left-symmetric RAID-5 write: the payload is cut into stripe_size chunks
// spread over N-1 drives per stripe, parity is the XOR of the (zero-padded)
// data chunks, and the parity position rotates backwards one drive per
// stripe. Each stripe occupies the same row on every drive, so XOR across
// any full row is zero.
StripeMap raid_write(DrivePool& pool, uint64_t object_id,
                     std::span<const uint8_t> data);

// Reassembles the object, fetching chunks in batches of up to `parallelism`
// outstanding requests. Completion order within a batch is arbitrary; the
// output is byte-exact regardless. Chunks on a failed drive are rebuilt
// from the row XOR; two failed drives in a stripe raise DataError naming
// the stripe.
Bytes raid_read(const DrivePool& pool, const StripeMap& map, int parallelism);

// Recomputes every row of the failed drive from its peers and clears the
// failure. A second failed drive makes the pool unrecoverable.
void reconstruct(DrivePool& pool, uint32_t failed_drive_id);

// XOR of every row touched by the map must be zero across all drives.
void verify_stripes(const DrivePool& pool, const StripeMap& map);

enum class TransferRoute : uint8_t { PeerToPeer = 0, HostRouted = 1 };

struct DriveTraffic {
  uint64_t bytes_read = 0;
  uint64_t bytes_written = 0;
};

struct TransferStats {
  uint64_t host_bytes = 0;
  uint64_t p2p_bytes = 0;
  std::map<uint32_t, DriveTraffic> per_drive;

  uint64_t total() const { return host_bytes + p2p_bytes; }
};

// Copies whole blocks from a source drive into the destination drive's
// compute-local buffer. Peer-to-peer keeps the bytes off the host link;
// host routing counts the same movement against it.
TransferStats transfer(DrivePool& pool, uint32_t src_drive, uint32_t dst_csd,
                       std::span<const uint64_t> block_indices,
                       TransferRoute route);

// --- Checkpoint -----------------------------------------------------------------

// Pipeline state snapshot for intermittent operation. The serialized form
// must never exceed 1024 bytes; the constructor-side check enforces it.
struct CheckpointState {
  uint8_t stage = 0;
  uint32_t group_index = 0;
  uint64_t stripe_cursor = 0;
  std::array<uint8_t, 32> generator_state{};
  Bytes resume_blob;  // stage-specific payload, bounded by the size budget

  static constexpr size_t kMaxSerialized = 1024;

  Bytes serialize() const;  // throws InvalidInput if the result would exceed 1 KiB
  static CheckpointState parse(std::span<const uint8_t> data);
};

Bytes save_checkpoint(const CheckpointState& state);
CheckpointState restore_checkpoint(std::span<const uint8_t> data);

}  // namespace salt::storage
