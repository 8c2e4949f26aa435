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

#include "salt/archive.hpp"

#include <algorithm>
#include <string>

#include "salt/crc32.hpp"
#include "salt/errors.hpp"
#include "salt/rng.hpp"

namespace salt::archive {

// --- Container -----------------------------------------------------------------

namespace {

constexpr uint8_t kContainerVersion = 1;

}  // namespace

Bytes ArchiveContainer::serialize() const {
  ByteWriter w;
  w.magic("SALT");
  w.u8(kContainerVersion);
  w.u16(header.width);
  w.u16(header.height);
  w.u32(header.frame_count);
  w.u8(header.num_layers);
  w.u8(header.anchor_interval);
  w.u16(header.ring_n);
  w.u16(header.ring_q);
  w.bytes(header.key_id);
  w.u32(header.stripe_size);
  w.u8(header.drive_count);
  w.u8(header.parity_scheme);
  w.u32(static_cast<uint32_t>(segments.size()));
  for (const SegmentEntry& e : segments) {
    w.u64(e.offset);
    w.u64(e.length);
    w.u32(e.crc);
  }
  w.bytes(payload);
  return w.take();
}

ArchiveContainer ArchiveContainer::parse(std::span<const uint8_t> data) {
  ByteReader r(data);
  r.expect_magic("SALT");
  if (r.u8() != kContainerVersion)
    throw DecodeError("unsupported container version");
  ArchiveContainer c;
  c.header.width = r.u16();
  c.header.height = r.u16();
  c.header.frame_count = r.u32();
  c.header.num_layers = r.u8();
  c.header.anchor_interval = r.u8();
  c.header.ring_n = r.u16();
  c.header.ring_q = r.u16();
  const auto id = r.bytes(c.header.key_id.size());
  std::copy(id.begin(), id.end(), c.header.key_id.begin());
  c.header.stripe_size = r.u32();
  c.header.drive_count = r.u8();
  c.header.parity_scheme = r.u8();
  const uint32_t nseg = r.u32();
  uint64_t payload_len = 0;
  for (uint32_t i = 0; i < nseg; ++i) {
    SegmentEntry e;
    e.offset = r.u64();
    e.length = r.u64();
    e.crc = r.u32();
    if (e.offset != payload_len)
      throw DecodeError("segment table offsets are not contiguous");
    payload_len += e.length;
    c.segments.push_back(e);
  }
  const auto payload = r.bytes(payload_len);
  c.payload.assign(payload.begin(), payload.end());
  if (!r.done()) throw DecodeError("container trailing bytes");
  return c;
}

// --- Block encryption -------------------------------------------------------------

uint64_t block_seed(uint64_t master_seed, uint64_t block_index) {
  return mix64(master_seed ^ mix64(block_index + 1));
}

size_t cipher_block_bytes(const rlwe::RingParams& params) {
  const size_t poly_bytes = (static_cast<size_t>(params.n) * 13 + 7) / 8;
  return poly_bytes * 2;
}

Bytes encrypt_blocks(std::span<const uint8_t> plain, const rlwe::PublicKey& pk,
                     const rlwe::RingParams& params, uint64_t master_seed,
                     uint64_t& block_counter) {
  if (params.n % 8 != 0)
    throw InvalidInput("ring degree must be a multiple of 8");
  const size_t block_bytes = params.n / 8;  // one bit per coefficient
  if (plain.size() % block_bytes != 0)
    throw InvalidInput("plaintext must be padded to the block size");

  ByteWriter out;
  rlwe::Plaintext m;
  m.bits.resize(params.n);
  for (size_t off = 0; off < plain.size(); off += block_bytes) {
    for (size_t i = 0; i < block_bytes; ++i) {
      const uint8_t byte = plain[off + i];
      for (int b = 0; b < 8; ++b) m.bits[i * 8 + b] = (byte >> b) & 1;
    }
    const rlwe::Ciphertext ct =
        rlwe::encrypt(m, pk, params, block_seed(master_seed, block_counter));
    ++block_counter;
    rlwe::pack_poly13(out, ct.c1);
    rlwe::pack_poly13(out, ct.c2);
  }
  return out.take();
}

Bytes decrypt_blocks(std::span<const uint8_t> cipher, const rlwe::SignedPoly& s,
                     const rlwe::RingParams& params) {
  const size_t cblock = cipher_block_bytes(params);
  if (cipher.size() % cblock != 0)
    throw DecodeError("ciphertext length is not a whole number of blocks");
  const size_t block_bytes = params.n / 8;

  Bytes out;
  out.reserve(cipher.size() / cblock * block_bytes);
  for (size_t off = 0; off < cipher.size(); off += cblock) {
    ByteReader r(cipher.subspan(off, cblock));
    rlwe::Ciphertext ct;
    ct.c1 = rlwe::unpack_poly13(r, params.n, params.q);
    ct.c2 = rlwe::unpack_poly13(r, params.n, params.q);
    const rlwe::Plaintext m = rlwe::decrypt(ct, s, params);
    for (size_t i = 0; i < block_bytes; ++i) {
      uint8_t byte = 0;
      for (int b = 0; b < 8; ++b) byte |= m.bits[i * 8 + b] << b;
      out.push_back(byte);
    }
  }
  return out;
}

// --- Staging and the resumable job ----------------------------------------------

uint64_t ArchiveStaging::total_bytes() const {
  uint64_t total = 0;
  for (const Bytes& s : segments) total += s.size();
  return total;
}

uint32_t ArchiveStaging::digest() const {
  uint32_t crc = 0;
  for (const Bytes& s : segments) crc = crc32_update(crc, s);
  return crc;
}

namespace {

size_t group_count_for(size_t frames, uint32_t anchor_interval) {
  return (frames + anchor_interval - 1) / anchor_interval;
}

}  // namespace

ArchiveJob::ArchiveJob(std::span<const codec::Frame> frames,
                       const ArchiveParams& params, const rlwe::PublicKey& pk,
                       const PoolGeometry& geometry)
    : frames_(frames.begin(), frames.end()),
      params_(params),
      pk_(pk),
      geometry_(geometry) {
  params_.codec.validate();
  params_.ring.validate();
  if (frames_.empty()) throw InvalidInput("archive: no frames");
  for (const codec::Frame& f : frames_)
    if (f.width != frames_[0].width || f.height != frames_[0].height)
      throw InvalidInput("archive: frame dimension mismatch");
  key_id_ = rlwe::derive_key_id(pk_, params_.ring);
  group_count_ = group_count_for(frames_.size(), params_.codec.anchor_interval);
  for (const codec::Frame& f : frames_) stats_.raw_bytes += f.pixel_count();
  refresh_checkpoint(kStageGroupComplete);
}

ArchiveJob ArchiveJob::resume(std::span<const codec::Frame> frames,
                              const ArchiveParams& params,
                              const rlwe::PublicKey& pk,
                              const PoolGeometry& geometry,
                              const storage::CheckpointState& checkpoint,
                              ArchiveStaging staging) {
  ArchiveJob job(frames, params, pk, geometry);
  if (checkpoint.group_index != staging.segments.size())
    throw DataError("checkpoint group index disagrees with staged segments");
  if (checkpoint.group_index > job.group_count_)
    throw DataError("checkpoint beyond the end of the input");

  // Generator state: master seed and next block counter.
  uint64_t seed = 0, counter = 0;
  for (int i = 0; i < 8; ++i) {
    seed |= static_cast<uint64_t>(checkpoint.generator_state[i]) << (8 * i);
    counter |= static_cast<uint64_t>(checkpoint.generator_state[8 + i]) << (8 * i);
  }
  if (seed != params.seed)
    throw DataError("checkpoint was written with a different seed");

  ByteReader blob(checkpoint.resume_blob);
  const uint32_t staged_count = blob.u32();
  const uint64_t staged_bytes = blob.u64();
  const uint32_t staged_crc = blob.u32();
  const uint64_t encoded_bytes = blob.u64();
  if (staged_count != staging.segments.size() ||
      staged_bytes != staging.total_bytes() || staged_crc != staging.digest())
    throw DataError("staged segments do not match the checkpoint");

  job.block_counter_ = counter;
  job.staging_ = std::move(staging);
  job.stats_.encoded_bytes = encoded_bytes;
  job.stats_.encrypted_bytes = job.staging_.total_bytes();
  job.refresh_checkpoint(job.finished() ? kStageFinished : kStageGroupComplete);
  return job;
}

void ArchiveJob::refresh_checkpoint(uint8_t stage) {
  checkpoint_.stage = stage;
  checkpoint_.group_index = static_cast<uint32_t>(staging_.segments.size());
  checkpoint_.stripe_cursor = staging_.total_bytes();  // bytes ready to stripe
  checkpoint_.generator_state.fill(0);
  for (int i = 0; i < 8; ++i) {
    checkpoint_.generator_state[i] =
        static_cast<uint8_t>(params_.seed >> (8 * i));
    checkpoint_.generator_state[8 + i] =
        static_cast<uint8_t>(block_counter_ >> (8 * i));
  }
  ByteWriter blob;
  blob.u32(static_cast<uint32_t>(staging_.segments.size()));
  blob.u64(staging_.total_bytes());
  blob.u32(staging_.digest());
  blob.u64(stats_.encoded_bytes);
  checkpoint_.resume_blob = blob.take();
}

bool ArchiveJob::step() {
  if (finished()) return false;
  const size_t g = groups_done();
  const size_t begin = g * params_.codec.anchor_interval;
  const size_t end =
      std::min(frames_.size(), begin + params_.codec.anchor_interval);

  const Bytes gop = codec::serialize_gop(codec::encode_gop(
      std::span(frames_).subspan(begin, end - begin), params_.codec));
  stats_.encoded_bytes += gop.size();

  // Segment plaintext: 32-bit length prefix + group bytes, zero-padded to
  // whole 256-bit blocks.
  ByteWriter plain;
  plain.u32(static_cast<uint32_t>(gop.size()));
  plain.bytes(gop);
  const size_t block_bytes = params_.ring.n / 8;
  while (plain.size() % block_bytes != 0) plain.u8(0);

  const Bytes cipher = encrypt_blocks(plain.data(), pk_, params_.ring,
                                      params_.seed, block_counter_);
  stats_.encrypted_bytes += cipher.size();
  staging_.segments.push_back(cipher);
  refresh_checkpoint(finished() ? kStageFinished : kStageGroupComplete);
  return true;
}

ArchiveContainer ArchiveJob::finish() const {
  if (!finished()) throw InvalidInput("archive job has unprocessed groups");
  ArchiveContainer c;
  c.header.width = frames_[0].width;
  c.header.height = frames_[0].height;
  c.header.frame_count = static_cast<uint32_t>(frames_.size());
  c.header.num_layers = static_cast<uint8_t>(params_.codec.num_layers);
  c.header.anchor_interval =
      static_cast<uint8_t>(params_.codec.anchor_interval);
  c.header.ring_n = static_cast<uint16_t>(params_.ring.n);
  c.header.ring_q = static_cast<uint16_t>(params_.ring.q);
  c.header.key_id = key_id_;
  c.header.stripe_size = geometry_.stripe_size;
  c.header.drive_count = geometry_.drive_count;
  uint64_t offset = 0;
  for (const Bytes& seg : staging_.segments) {
    c.segments.push_back({offset, seg.size(), crc32(seg)});
    c.payload.insert(c.payload.end(), seg.begin(), seg.end());
    offset += seg.size();
  }
  return c;
}

// --- Full pipelines ---------------------------------------------------------------

ArchiveResult archive(std::span<const codec::Frame> frames,
                      storage::DrivePool& pool, const rlwe::KeyPair& keys,
                      const ArchiveParams& params) {
  PoolGeometry geom{pool.stripe_size(),
                    static_cast<uint8_t>(pool.drive_count())};
  ArchiveJob job(frames, params, keys.pk, geom);
  while (job.step()) {
    // Checkpoint after every group; a restart resumes from here.
  }
  ArchiveResult res;
  res.container = job.finish();
  res.stats = job.stats();
  const Bytes bytes = res.container.serialize();
  const uint64_t object_id =
      fnv1a64(keys.id.data(), keys.id.size()) ^ mix64(frames.size());
  res.map = storage::raid_write(pool, object_id, bytes);
  return res;
}

RetrieveResult retrieve_container(const ArchiveContainer& container,
                                  const rlwe::KeyPair& keys, uint32_t k_max,
                                  const exemplar::ClusterModel* model,
                                  uint64_t extractor_seed) {
  const ContainerHeader& h = container.header;
  rlwe::RingParams ring;
  ring.n = h.ring_n;
  ring.q = h.ring_q;
  ring.validate();
  if (h.key_id != keys.id)
    throw InvalidInput("container was encrypted under a different key");

  RetrieveResult res;
  for (size_t i = 0; i < container.segments.size(); ++i) {
    const SegmentEntry& e = container.segments[i];
    if (e.offset + e.length > container.payload.size())
      throw DecodeError("segment " + std::to_string(i) + ": out of bounds");
    const auto seg =
        std::span(container.payload).subspan(e.offset, e.length);
    if (crc32(seg) != e.crc)
      throw DataError("segment " + std::to_string(i) + ": CRC mismatch");

    const Bytes plain = decrypt_blocks(seg, keys.s, ring);
    ByteReader r(plain);
    const uint32_t gop_len = r.u32();
    if (gop_len > r.remaining())
      throw DecodeError("segment " + std::to_string(i) +
                        ": group length exceeds plaintext");
    const codec::EncodedGop gop = codec::parse_gop(r.bytes(gop_len));
    for (codec::Frame& f : codec::decode_gop(gop, k_max))
      res.frames.push_back(std::move(f));
  }
  if (res.frames.size() != h.frame_count)
    throw DecodeError("decoded frame count disagrees with the header");

  if (model) {
    const autoenc::FeatureExtractor ex = autoenc::make_extractor(extractor_seed);
    std::vector<exemplar::FeatureVector> features;
    features.reserve(res.frames.size());
    for (const codec::Frame& f : res.frames)
      features.push_back(autoenc::extract_features(f, ex));
    res.tags.reserve(features.size());
    for (const auto& fv : features)
      res.tags.push_back(exemplar::classify_drift(fv, *model));
    res.exemplar_indices = exemplar::select_exemplars(features, *model);
    for (size_t idx : res.exemplar_indices)
      res.exemplars.push_back(res.frames[idx]);
  }
  return res;
}

RetrieveResult retrieve(const storage::DrivePool& pool,
                        const storage::StripeMap& map,
                        const rlwe::KeyPair& keys, uint32_t k_max,
                        const exemplar::ClusterModel* model, int parallelism,
                        uint64_t extractor_seed) {
  const Bytes bytes = storage::raid_read(pool, map, parallelism);
  const ArchiveContainer container = ArchiveContainer::parse(bytes);
  return retrieve_container(container, keys, k_max, model, extractor_seed);
}

}  // namespace salt::archive
