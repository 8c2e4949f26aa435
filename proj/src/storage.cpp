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

#include "salt/storage.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "salt/crc32.hpp"
#include "salt/errors.hpp"
#include "salt/rng.hpp"

namespace salt::storage {

// --- Layout ---------------------------------------------------------------------

void PoolLayout::validate() const {
  if (stripe_size == 0 || stripe_size % kBlockSize != 0)
    throw InvalidInput("stripe size must be a positive multiple of 4 KiB");
  if (drives.size() < 3)
    throw InvalidInput("RAID-5 needs at least three drives");
  std::set<uint32_t> ids;
  for (const auto& d : drives) {
    if (!ids.insert(d.id).second)
      throw InvalidInput("duplicate drive id " + std::to_string(d.id));
    if (d.capacity == 0 || d.capacity % stripe_size != 0)
      throw InvalidInput("drive capacity must be a positive multiple of the stripe size");
  }
}

std::string PoolLayout::to_text() const {
  std::ostringstream out;
  out << "stripe_size=" << stripe_size << '\n';
  out << "next_row=" << next_row << '\n';
  for (const auto& d : drives) {
    out << "drive.id=" << d.id << '\n';
    out << "drive.kind=" << (d.kind == DriveKind::Csd ? "csd" : "plain") << '\n';
    out << "drive.capacity=" << d.capacity << '\n';
    if (!d.backing_path.empty()) out << "drive.path=" << d.backing_path << '\n';
    if (d.failed) out << "drive.failed=true" << '\n';
  }
  return out.str();
}

PoolLayout PoolLayout::parse(const std::string& text) {
  PoolLayout layout;
  layout.drives.clear();
  std::istringstream in(text);
  std::string line;
  DriveConfig* cur = nullptr;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("pool layout: expected key=value, got '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "stripe_size") {
      layout.stripe_size = static_cast<uint32_t>(std::stoul(value));
    } else if (key == "next_row") {
      layout.next_row = std::stoull(value);
    } else if (key == "drive.id") {
      layout.drives.emplace_back();
      cur = &layout.drives.back();
      cur->id = static_cast<uint32_t>(std::stoul(value));
    } else if (cur == nullptr) {
      throw InvalidInput("pool layout: '" + key + "' before any drive.id");
    } else if (key == "drive.kind") {
      if (value == "csd") cur->kind = DriveKind::Csd;
      else if (value == "plain") cur->kind = DriveKind::Plain;
      else throw InvalidInput("pool layout: unknown drive kind '" + value + "'");
    } else if (key == "drive.capacity") {
      cur->capacity = std::stoull(value);
    } else if (key == "drive.path") {
      cur->backing_path = value;
    } else if (key == "drive.failed") {
      cur->failed = value == "true" || value == "1";
    } else {
      throw InvalidInput("pool layout: unknown key '" + key + "'");
    }
  }
  layout.validate();
  return layout;
}

PoolLayout PoolLayout::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open pool layout file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void PoolLayout::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write pool layout file: " + path);
  out << to_text();
}

// --- Drive ---------------------------------------------------------------------

namespace {

std::FILE* open_backing(const std::string& path, uint64_t capacity) {
  std::FILE* f = std::fopen(path.c_str(), "r+b");
  if (!f) {
    f = std::fopen(path.c_str(), "w+b");
    if (!f) throw InvalidInput("cannot open drive backing file: " + path);
  }
  // Size the store up front so reads of untouched space see zeros.
  std::fseek(f, 0, SEEK_END);
  const long size = std::ftell(f);
  if (size >= 0 && static_cast<uint64_t>(size) < capacity) {
    const Bytes zeros(64 * 1024, 0);
    uint64_t remaining = capacity - static_cast<uint64_t>(size);
    while (remaining > 0) {
      const size_t n = std::min<uint64_t>(remaining, zeros.size());
      if (std::fwrite(zeros.data(), 1, n, f) != n)
        throw InvalidInput("cannot initialize drive backing file: " + path);
      remaining -= n;
    }
  }
  return f;
}

}  // namespace

Drive::Drive(const DriveConfig& cfg)
    : cfg_(cfg), file_(nullptr, std::fclose) {
  if (cfg_.backing_path.empty()) {
    mem_.assign(cfg_.capacity, 0);
  } else {
    file_.reset(open_backing(cfg_.backing_path, cfg_.capacity));
  }
}

Drive::~Drive() = default;

void Drive::read(uint64_t offset, std::span<uint8_t> out) const {
  if (failed())
    throw DataError("drive " + std::to_string(id()) + " has failed");
  raw_read(offset, out);
}

void Drive::write(uint64_t offset, std::span<const uint8_t> data) {
  if (failed())
    throw DataError("drive " + std::to_string(id()) + " has failed");
  raw_write(offset, data);
}

void Drive::raw_read(uint64_t offset, std::span<uint8_t> out) const {
  if (offset + out.size() > cfg_.capacity)
    throw InvalidInput("drive read past capacity");
  if (file_) {
    std::fseek(file_.get(), static_cast<long>(offset), SEEK_SET);
    if (std::fread(out.data(), 1, out.size(), file_.get()) != out.size())
      throw DataError("short read from drive backing file");
  } else {
    std::copy_n(mem_.begin() + static_cast<ptrdiff_t>(offset), out.size(),
                out.begin());
  }
}

void Drive::raw_write(uint64_t offset, std::span<const uint8_t> data) {
  if (offset + data.size() > cfg_.capacity)
    throw InvalidInput("drive write past capacity");
  if (file_) {
    std::fseek(file_.get(), static_cast<long>(offset), SEEK_SET);
    if (std::fwrite(data.data(), 1, data.size(), file_.get()) != data.size())
      throw DataError("short write to drive backing file");
    std::fflush(file_.get());
  } else {
    std::copy(data.begin(), data.end(),
              mem_.begin() + static_cast<ptrdiff_t>(offset));
  }
}

// --- Pool ----------------------------------------------------------------------

DrivePool::DrivePool(const PoolLayout& layout) {
  layout.validate();
  stripe_size_ = layout.stripe_size;
  next_row_ = layout.next_row;
  for (const auto& cfg : layout.drives) {
    by_id_[cfg.id] = drives_.size();
    drives_.push_back(std::make_unique<Drive>(cfg));
  }
}

Drive& DrivePool::drive(uint32_t id) {
  const auto it = by_id_.find(id);
  if (it == by_id_.end())
    throw InvalidInput("no drive with id " + std::to_string(id));
  return *drives_[it->second];
}

const Drive& DrivePool::drive(uint32_t id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end())
    throw InvalidInput("no drive with id " + std::to_string(id));
  return *drives_[it->second];
}

void DrivePool::fail_drive(uint32_t id) { drive(id).set_failed(true); }

size_t DrivePool::failed_count() const {
  size_t n = 0;
  for (const auto& d : drives_) n += d->failed();
  return n;
}

PoolLayout DrivePool::layout() const {
  PoolLayout l;
  l.stripe_size = stripe_size_;
  l.next_row = next_row_;
  for (const auto& d : drives_) l.drives.push_back(d->config());
  return l;
}

// --- RAID-5 ----------------------------------------------------------------------

namespace {

// Left-symmetric rotation: parity starts on the last drive and moves one
// drive backwards per stripe; data fills the following drives in order.
uint32_t parity_position(uint32_t stripe_index, uint32_t drive_count) {
  return (drive_count - 1 - stripe_index % drive_count) % drive_count;
}

}  // namespace

StripeMap raid_write(DrivePool& pool, uint64_t object_id,
                     std::span<const uint8_t> data) {
  const uint32_t ss = pool.stripe_size();
  const uint32_t n = static_cast<uint32_t>(pool.drive_count());
  const uint32_t data_per_stripe = (n - 1) * ss;
  const uint64_t stripe_count =
      (data.size() + data_per_stripe - 1) / data_per_stripe;
  if (stripe_count == 0)
    throw InvalidInput("raid_write: empty object");

  const uint64_t rows_needed = pool.next_row() + stripe_count;
  for (size_t i = 0; i < pool.drive_count(); ++i)
    if (rows_needed * ss > pool.drive_at(i).capacity())
      throw InvalidInput("raid_write: pool capacity exceeded");

  StripeMap map;
  map.object_id = object_id;
  map.total_length = data.size();
  map.stripe_size = ss;

  Bytes chunk(ss), parity(ss);
  uint64_t pos = 0;
  for (uint32_t s = 0; s < stripe_count; ++s) {
    const uint64_t row = pool.next_row();
    pool.set_next_row(row + 1);
    const uint64_t row_off = row * ss;
    const uint32_t pidx = parity_position(s, n);

    StripeInfo info;
    info.index = s;
    info.row = row;
    info.parity_drive = pool.drive_at(pidx).id();
    std::fill(parity.begin(), parity.end(), 0);

    for (uint32_t j = 0; j < n - 1 && pos < data.size(); ++j) {
      const uint32_t len =
          static_cast<uint32_t>(std::min<uint64_t>(ss, data.size() - pos));
      std::fill(chunk.begin(), chunk.end(), 0);
      std::copy_n(data.begin() + static_cast<ptrdiff_t>(pos), len, chunk.begin());
      pos += len;

      Drive& d = pool.drive_at((pidx + 1 + j) % n);
      d.write(row_off, chunk);
      for (uint32_t b = 0; b < ss; ++b) parity[b] ^= chunk[b];
      info.data.push_back({d.id(), row_off, len});
    }

    Drive& pd = pool.drive_at(pidx);
    pd.write(row_off, parity);
    info.parity = {pd.id(), row_off, ss};
    map.stripes.push_back(std::move(info));
  }
  return map;
}

namespace {

// Rebuilds one chunk of a failed drive from the row XOR of its peers.
Bytes degraded_chunk(const DrivePool& pool, const StripeInfo& stripe,
                     uint32_t missing_drive) {
  const uint32_t ss = pool.stripe_size();
  size_t missing = 0;
  for (size_t i = 0; i < pool.drive_count(); ++i)
    missing += pool.drive_at(i).failed();
  if (missing > 1)
    throw DataError("stripe " + std::to_string(stripe.index) +
                    ": unrecoverable, " + std::to_string(missing) +
                    " drives failed");

  Bytes acc(ss, 0), tmp(ss);
  const uint64_t row_off = stripe.row * ss;
  for (size_t i = 0; i < pool.drive_count(); ++i) {
    const Drive& d = pool.drive_at(i);
    if (d.id() == missing_drive) continue;
    d.read(row_off, tmp);
    for (uint32_t b = 0; b < ss; ++b) acc[b] ^= tmp[b];
  }
  return acc;
}

struct ReadTask {
  size_t stripe = 0;
  size_t chunk = 0;
  uint64_t out_offset = 0;
};

}  // namespace

Bytes raid_read(const DrivePool& pool, const StripeMap& map, int parallelism) {
  if (parallelism < 1) throw InvalidInput("raid_read: parallelism must be >= 1");
  if (map.stripe_size != pool.stripe_size())
    throw InvalidInput("raid_read: stripe size mismatch");

  // Gather every chunk fetch up front, then issue them in batches of up to
  // `parallelism` outstanding requests. Each completion lands at its mapped
  // output offset, so the assembled bytes do not depend on ordering.
  std::vector<ReadTask> tasks;
  uint64_t out_offset = 0;
  for (size_t s = 0; s < map.stripes.size(); ++s) {
    for (size_t c = 0; c < map.stripes[s].data.size(); ++c) {
      tasks.push_back({s, c, out_offset});
      out_offset += map.stripes[s].data[c].length;
    }
  }
  if (out_offset != map.total_length)
    throw DecodeError("stripe map length inconsistent with chunks");

  Bytes out(map.total_length);
  Bytes buf;
  SplitMix64 completion_rng(mix64(map.object_id));
  for (size_t base = 0; base < tasks.size();
       base += static_cast<size_t>(parallelism)) {
    const size_t batch_end =
        std::min(tasks.size(), base + static_cast<size_t>(parallelism));
    // Outstanding requests complete in arbitrary order; simulate that with
    // a shuffled completion order inside each batch.
    std::vector<size_t> order;
    for (size_t t = base; t < batch_end; ++t) order.push_back(t);
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[completion_rng.next_below(i)]);
    for (size_t t : order) {
      const StripeInfo& stripe = map.stripes[tasks[t].stripe];
      const ChunkLoc& loc = stripe.data[tasks[t].chunk];
      const Drive& d = pool.drive(loc.drive_id);
      if (d.failed()) {
        const Bytes rebuilt = degraded_chunk(pool, stripe, loc.drive_id);
        std::copy_n(rebuilt.begin(), loc.length,
                    out.begin() + static_cast<ptrdiff_t>(tasks[t].out_offset));
      } else {
        buf.resize(loc.length);
        d.read(loc.offset, buf);
        std::copy(buf.begin(), buf.end(),
                  out.begin() + static_cast<ptrdiff_t>(tasks[t].out_offset));
      }
    }
  }
  return out;
}

void reconstruct(DrivePool& pool, uint32_t failed_drive_id) {
  Drive& target = pool.drive(failed_drive_id);
  if (!target.failed())
    throw InvalidInput("reconstruct: drive " + std::to_string(failed_drive_id) +
                       " is not failed");
  if (pool.failed_count() > 1)
    throw DataError("reconstruct: unrecoverable, more than one drive failed");

  const uint32_t ss = pool.stripe_size();
  Bytes acc(ss), tmp(ss);
  for (uint64_t row = 0; row < pool.next_row(); ++row) {
    std::fill(acc.begin(), acc.end(), 0);
    for (size_t i = 0; i < pool.drive_count(); ++i) {
      const Drive& d = pool.drive_at(i);
      if (d.id() == failed_drive_id) continue;
      d.read(row * ss, tmp);
      for (uint32_t b = 0; b < ss; ++b) acc[b] ^= tmp[b];
    }
    target.raw_write(row * ss, acc);
  }
  target.set_failed(false);
}

void verify_stripes(const DrivePool& pool, const StripeMap& map) {
  const uint32_t ss = pool.stripe_size();
  Bytes acc(ss), tmp(ss);
  for (const StripeInfo& stripe : map.stripes) {
    std::fill(acc.begin(), acc.end(), 0);
    for (size_t i = 0; i < pool.drive_count(); ++i) {
      pool.drive_at(i).read(stripe.row * ss, tmp);
      for (uint32_t b = 0; b < ss; ++b) acc[b] ^= tmp[b];
    }
    for (uint32_t b = 0; b < ss; ++b)
      if (acc[b] != 0)
        throw DataError("stripe " + std::to_string(stripe.index) +
                        ": parity mismatch at byte " + std::to_string(b));
  }
}

// --- Transfers --------------------------------------------------------------------

TransferStats transfer(DrivePool& pool, uint32_t src_drive, uint32_t dst_csd,
                       std::span<const uint64_t> block_indices,
                       TransferRoute route) {
  Drive& src = pool.drive(src_drive);
  Drive& dst = pool.drive(dst_csd);
  if (dst.kind() != DriveKind::Csd)
    throw InvalidInput("transfer: destination drive " + std::to_string(dst_csd) +
                       " is not a CSD");

  TransferStats stats;
  Bytes block(kBlockSize);
  for (uint64_t idx : block_indices) {
    src.read(idx * kBlockSize, block);
    dst.csd_buffer().insert(dst.csd_buffer().end(), block.begin(), block.end());
    stats.per_drive[src_drive].bytes_read += kBlockSize;
    stats.per_drive[dst_csd].bytes_written += kBlockSize;
  }
  const uint64_t moved = block_indices.size() * kBlockSize;
  if (route == TransferRoute::PeerToPeer)
    stats.p2p_bytes = moved;
  else
    stats.host_bytes = moved;
  return stats;
}

// --- Stripe map serialization -------------------------------------------------

Bytes StripeMap::serialize() const {
  ByteWriter w;
  w.magic("SMAP");
  w.u8(1);
  w.u64(object_id);
  w.u64(total_length);
  w.u32(stripe_size);
  w.u32(static_cast<uint32_t>(stripes.size()));
  for (const StripeInfo& s : stripes) {
    w.u32(s.index);
    w.u64(s.row);
    w.u32(s.parity_drive);
    w.u8(static_cast<uint8_t>(s.data.size()));
    for (const ChunkLoc& c : s.data) {
      w.u32(c.drive_id);
      w.u64(c.offset);
      w.u32(c.length);
    }
    w.u32(s.parity.drive_id);
    w.u64(s.parity.offset);
    w.u32(s.parity.length);
  }
  return w.take();
}

StripeMap StripeMap::parse(std::span<const uint8_t> data) {
  ByteReader r(data);
  r.expect_magic("SMAP");
  if (r.u8() != 1) throw DecodeError("unsupported SMAP version");
  StripeMap m;
  m.object_id = r.u64();
  m.total_length = r.u64();
  m.stripe_size = r.u32();
  const uint32_t count = r.u32();
  for (uint32_t i = 0; i < count; ++i) {
    StripeInfo s;
    s.index = r.u32();
    s.row = r.u64();
    s.parity_drive = r.u32();
    const uint8_t chunks = r.u8();
    for (uint8_t c = 0; c < chunks; ++c) {
      ChunkLoc loc;
      loc.drive_id = r.u32();
      loc.offset = r.u64();
      loc.length = r.u32();
      s.data.push_back(loc);
    }
    s.parity.drive_id = r.u32();
    s.parity.offset = r.u64();
    s.parity.length = r.u32();
    m.stripes.push_back(std::move(s));
  }
  if (!r.done()) throw DecodeError("SMAP trailing bytes");
  return m;
}

// --- Checkpoint --------------------------------------------------------------------

Bytes CheckpointState::serialize() const {
  ByteWriter w;
  w.magic("SCKP");
  w.u8(1);
  w.u8(stage);
  w.u32(group_index);
  w.u64(stripe_cursor);
  w.bytes(generator_state);
  w.u16(static_cast<uint16_t>(resume_blob.size()));
  w.bytes(resume_blob);
  const uint32_t crc = crc32(w.data());
  w.u32(crc);
  Bytes out = w.take();
  if (out.size() > kMaxSerialized)
    throw InvalidInput("checkpoint exceeds the 1 KiB state budget");
  return out;
}

CheckpointState CheckpointState::parse(std::span<const uint8_t> data) {
  if (data.size() > kMaxSerialized)
    throw DecodeError("checkpoint larger than the 1 KiB state budget");
  if (data.size() < 4) throw DecodeError("checkpoint truncated");
  const uint32_t stored_crc =
      static_cast<uint32_t>(data[data.size() - 4]) |
      static_cast<uint32_t>(data[data.size() - 3]) << 8 |
      static_cast<uint32_t>(data[data.size() - 2]) << 16 |
      static_cast<uint32_t>(data[data.size() - 1]) << 24;
  if (crc32(data.subspan(0, data.size() - 4)) != stored_crc)
    throw DataError("checkpoint CRC mismatch");

  ByteReader r(data.subspan(0, data.size() - 4));
  r.expect_magic("SCKP");
  if (r.u8() != 1) throw DecodeError("unsupported checkpoint version");
  CheckpointState s;
  s.stage = r.u8();
  s.group_index = r.u32();
  s.stripe_cursor = r.u64();
  const auto gen = r.bytes(s.generator_state.size());
  std::copy(gen.begin(), gen.end(), s.generator_state.begin());
  const uint16_t blob_len = r.u16();
  const auto blob = r.bytes(blob_len);
  s.resume_blob.assign(blob.begin(), blob.end());
  if (!r.done()) throw DecodeError("checkpoint trailing bytes");
  return s;
}

Bytes save_checkpoint(const CheckpointState& state) { return state.serialize(); }

CheckpointState restore_checkpoint(std::span<const uint8_t> data) {
  return CheckpointState::parse(data);
}

}  // namespace salt::storage
