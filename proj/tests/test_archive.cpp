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

#include "salt/archive.hpp"
#include "salt/errors.hpp"
#include "support/oracles.hpp"

using namespace salt;
using namespace salt::archive;

namespace {

storage::PoolLayout test_pool_layout(size_t drives = 4) {
  storage::PoolLayout layout;
  layout.stripe_size = 4096;
  for (size_t i = 0; i < drives; ++i) {
    storage::DriveConfig d;
    d.id = static_cast<uint32_t>(i);
    d.kind = i + 1 == drives ? storage::DriveKind::Csd
                             : storage::DriveKind::Plain;
    d.capacity = 4096ull * 2048;
    layout.drives.push_back(d);
  }
  return layout;
}

std::vector<codec::Frame> smooth_clip(size_t count, uint16_t w = 32,
                                      uint16_t h = 32) {
  // Slowly drifting gradient: compressible, and all frames map to nearby
  // feature vectors.
  std::vector<codec::Frame> frames;
  for (size_t t = 0; t < count; ++t) {
    codec::Frame f(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        f.at(y, x) = static_cast<uint8_t>((x * 4 + y * 2 + t) & 0xff);
    frames.push_back(std::move(f));
  }
  return frames;
}

ArchiveParams small_params(uint64_t seed = 5) {
  ArchiveParams p;
  p.codec.anchor_interval = 4;
  p.seed = seed;
  return p;
}

}  // namespace

TEST_CASE("block encryption: byte stream round-trip") {
  const rlwe::RingParams ring;
  const rlwe::KeyPair kp = rlwe::keygen(ring, 3);
  Bytes plain(96);  // three 256-bit blocks
  SplitMix64 rng(4);
  for (auto& b : plain) b = static_cast<uint8_t>(rng.next());

  uint64_t counter = 0;
  const Bytes cipher = encrypt_blocks(plain, kp.pk, ring, 9, counter);
  CHECK(counter == 3);
  CHECK(cipher.size() == 3 * cipher_block_bytes(ring));
  CHECK(cipher_block_bytes(ring) == 832);
  CHECK(decrypt_blocks(cipher, kp.s, ring) == plain);

  CHECK_THROWS_AS(decrypt_blocks(std::span(cipher).subspan(1), kp.s, ring),
                  DecodeError);
}

TEST_CASE("block encryption: per-block streams differ but replay exactly") {
  const rlwe::RingParams ring;
  const rlwe::KeyPair kp = rlwe::keygen(ring, 3);
  const Bytes plain(64, 0xAA);
  uint64_t c1 = 0, c2 = 0;
  const Bytes a = encrypt_blocks(plain, kp.pk, ring, 9, c1);
  const Bytes b = encrypt_blocks(plain, kp.pk, ring, 9, c2);
  CHECK(a == b);
  // Identical plaintext blocks must still produce distinct ciphertext.
  CHECK(Bytes(a.begin(), a.begin() + 832) != Bytes(a.begin() + 832, a.begin() + 1664));
}

TEST_CASE("archive/retrieve: lossless end-to-end identity") {
  storage::DrivePool pool(test_pool_layout());
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::keygen(ring, 1);
  const auto frames = smooth_clip(10);

  const ArchiveResult res = archive::archive(frames, pool, keys, small_params());
  CHECK(res.stats.raw_bytes == 10 * 32 * 32);
  CHECK(res.container.segments.size() == 3);  // 4 + 4 + 2 frames
  CHECK(res.container.header.frame_count == 10);

  const RetrieveResult got = retrieve(pool, res.map, keys, 4);
  REQUIRE(got.frames.size() == frames.size());
  for (size_t i = 0; i < frames.size(); ++i) CHECK(got.frames[i] == frames[i]);
}

TEST_CASE("archive: static clip stays under 10% of raw before encryption") {
  storage::DrivePool pool(test_pool_layout());
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::keygen(ring, 1);
  // A fixed scene: flat background with a gradient patch.
  codec::Frame base(64, 64, 96);
  for (int y = 16; y < 48; ++y)
    for (int x = 16; x < 48; ++x)
      base.at(y, x) = static_cast<uint8_t>(64 + x * 2 + y);
  const std::vector<codec::Frame> frames(32, base);

  ArchiveParams params;
  params.seed = 2;
  const ArchiveResult res = archive::archive(frames, pool, keys, params);
  CHECK(res.stats.raw_bytes == 32 * 64 * 64);
  CHECK(res.stats.encoded_bytes * 10 < res.stats.raw_bytes);
  // The block cipher's fixed expansion is reported, not hidden.
  CHECK(res.stats.cipher_expansion() == doctest::Approx(26.0).epsilon(0.05));
}

TEST_CASE("archive: retrieval survives one drive failure bit-exactly") {
  const auto layout = test_pool_layout();
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::keygen(ring, 6);
  const auto frames = smooth_clip(8);
  for (uint32_t victim = 0; victim < 4; ++victim) {
    storage::DrivePool pool(layout);
    const ArchiveResult res = archive::archive(frames, pool, keys, small_params());
    pool.fail_drive(victim);
    const RetrieveResult got = retrieve(pool, res.map, keys, 4, nullptr, 3);
    for (size_t i = 0; i < frames.size(); ++i)
      CHECK(got.frames[i] == frames[i]);
  }
}

TEST_CASE("archive: checkpoint replay at every group boundary") {
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::keygen(ring, 8);
  const auto frames = smooth_clip(12);  // 3 groups of 4
  const ArchiveParams params = small_params(77);
  const PoolGeometry geom{4096, 4};

  // Reference: uninterrupted run.
  ArchiveJob ref(frames, params, keys.pk, geom);
  while (ref.step()) {
  }
  const Bytes expected = ref.finish().serialize();

  // Abort after each group boundary, resume from the durable pair
  // (checkpoint, staging), and compare the final container bytes.
  for (size_t abort_after = 0; abort_after <= 3; ++abort_after) {
    ArchiveJob job(frames, params, keys.pk, geom);
    for (size_t g = 0; g < abort_after; ++g) REQUIRE(job.step());
    const storage::CheckpointState cp = job.checkpoint();
    const Bytes cp_bytes = storage::save_checkpoint(cp);
    CHECK(cp_bytes.size() <= storage::CheckpointState::kMaxSerialized);
    ArchiveStaging staged = job.take_staging();
    // The in-flight job is gone now; restart from durable state.
    ArchiveJob resumed =
        ArchiveJob::resume(frames, params, keys.pk, geom,
                           storage::restore_checkpoint(cp_bytes),
                           std::move(staged));
    while (resumed.step()) {
    }
    CHECK(resumed.finish().serialize() == expected);
  }
}

TEST_CASE("archive: resume validates checkpoint against staging") {
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::keygen(ring, 8);
  const auto frames = smooth_clip(8);
  const ArchiveParams params = small_params();
  const PoolGeometry geom{4096, 4};

  ArchiveJob job(frames, params, keys.pk, geom);
  REQUIRE(job.step());
  const storage::CheckpointState cp = job.checkpoint();
  ArchiveStaging staging = job.take_staging();

  ArchiveStaging tampered = staging;
  tampered.segments[0][0] ^= 0x01;
  CHECK_THROWS_AS(
      ArchiveJob::resume(frames, params, keys.pk, geom, cp, tampered),
      DataError);

  ArchiveParams wrong_seed = params;
  wrong_seed.seed += 1;
  CHECK_THROWS_AS(
      ArchiveJob::resume(frames, wrong_seed, keys.pk, geom, cp, staging),
      DataError);
}

TEST_CASE("retrieve: corrupted segment names itself in the CRC error") {
  storage::DrivePool pool(test_pool_layout());
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::keygen(ring, 2);
  const auto frames = smooth_clip(8);
  ArchiveResult res = archive::archive(frames, pool, keys, small_params());

  // Flip one payload byte inside the second segment.
  ArchiveContainer tampered = res.container;
  tampered.payload[tampered.segments[1].offset + 5] ^= 0x80;
  try {
    retrieve_container(tampered, keys, 4);
    FAIL("expected a CRC failure");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("segment 1") != std::string::npos);
    CHECK(std::string(e.what()).find("CRC") != std::string::npos);
  }
}

TEST_CASE("retrieve: wrong key is rejected by its id") {
  storage::DrivePool pool(test_pool_layout());
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::keygen(ring, 2);
  const rlwe::KeyPair other = rlwe::keygen(ring, 3);
  const auto frames = smooth_clip(4);
  const ArchiveResult res = archive::archive(frames, pool, keys, small_params());
  CHECK_THROWS_AS(retrieve(pool, res.map, other, 4), InvalidInput);
}

TEST_CASE("retrieve: exemplar read tags exactly the injected novel frame") {
  storage::DrivePool pool(test_pool_layout());
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::keygen(ring, 4);

  auto frames = smooth_clip(10);
  // Inject an out-of-distribution frame: a harsh checkerboard.
  const size_t novel_at = 6;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x)
      frames[novel_at].at(y, x) = ((x / 2 + y / 2) % 2) ? 255 : 0;

  // Train the model on the smooth frames only.
  const autoenc::FeatureExtractor ex = autoenc::make_extractor(kDefaultExtractorSeed);
  std::vector<exemplar::FeatureVector> train;
  for (size_t i = 0; i < frames.size(); ++i)
    if (i != novel_at) train.push_back(autoenc::extract_features(frames[i], ex));
  const exemplar::ClusterModel model = exemplar::kmeans_cluster(
      train, exemplar::kmeanspp_seed(train, 2, 0));

  const ArchiveResult res = archive::archive(frames, pool, keys, small_params());
  const RetrieveResult got = retrieve(pool, res.map, keys, 4, &model);

  REQUIRE(got.tags.size() == frames.size());
  CHECK(got.tags[novel_at] == exemplar::DriftCase::Novel);
  CHECK(got.exemplar_indices == std::vector<size_t>{novel_at});
  REQUIRE(got.exemplars.size() == 1);
  CHECK(got.exemplars[0] == frames[novel_at]);

  // A model centered on the clip itself returns nothing.
  std::vector<exemplar::FeatureVector> all;
  for (const auto& f : frames) all.push_back(autoenc::extract_features(f, ex));
  const exemplar::ClusterModel cover = exemplar::kmeans_cluster(
      all, exemplar::kmeanspp_seed(all, 3, 1));
  const RetrieveResult none = retrieve(pool, res.map, keys, 4, &cover);
  CHECK(none.exemplar_indices.empty());
}

TEST_CASE("container serialization: round-trip and tamper detection") {
  storage::DrivePool pool(test_pool_layout());
  const rlwe::RingParams ring;
  const rlwe::KeyPair keys = rlwe::keygen(ring, 5);
  const auto frames = smooth_clip(6);
  const ArchiveResult res = archive::archive(frames, pool, keys, small_params());

  const Bytes bytes = res.container.serialize();
  const ArchiveContainer back = ArchiveContainer::parse(bytes);
  CHECK(back.header.frame_count == res.container.header.frame_count);
  CHECK(back.header.key_id == res.container.header.key_id);
  CHECK(back.payload == res.container.payload);
  CHECK(back.segments.size() == res.container.segments.size());

  Bytes truncated(bytes.begin(), bytes.begin() + bytes.size() - 10);
  CHECK_THROWS_AS(ArchiveContainer::parse(truncated), DecodeError);
}
