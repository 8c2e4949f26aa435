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

#include <cmath>

#include "salt/codec.hpp"
#include "salt/errors.hpp"
#include "support/oracles.hpp"

using namespace salt;
using namespace salt::codec;

namespace {

// Pans the sampling window one pixel to the right: cur(y, x) = prev(y, x+1),
// with the last column replicated.
Frame shift_window_right(const Frame& prev) {
  Frame cur(prev.width, prev.height);
  for (int y = 0; y < prev.height; ++y)
    for (int x = 0; x < prev.width; ++x)
      cur.at(y, x) = prev.at(y, std::min<int>(x + 1, prev.width - 1));
  return cur;
}

std::vector<Frame> random_clip(uint16_t w, uint16_t h, size_t count,
                               uint64_t seed) {
  std::vector<Frame> frames;
  for (size_t i = 0; i < count; ++i)
    frames.push_back(oracles::random_frame(w, h, seed * 1000 + i));
  return frames;
}

}  // namespace

TEST_CASE("estimate_motion: identical frames give the zero field") {
  const Frame f = oracles::random_frame(32, 24, 1);
  const MotionVectorField mv = estimate_motion(f, f, 8, 7);
  CHECK(mv.rows == 3);
  CHECK(mv.cols == 4);
  for (const MotionVector& v : mv.vectors) CHECK(v == MotionVector{0, 0});
}

TEST_CASE("estimate_motion: one-pixel pan matches the full-search oracle") {
  const Frame prev = oracles::random_frame(64, 32, 2);
  const Frame cur = shift_window_right(prev);
  const MotionVectorField mv = estimate_motion(prev, cur, 8, 7);
  for (int r = 0; r < mv.rows; ++r) {
    for (int c = 0; c < mv.cols; ++c) {
      const MotionVector expect =
          oracles::full_search_block(prev, cur, r * 8, c * 8, 8, 7);
      CHECK(mv.at(r, c) == expect);
      if (c + 1 < mv.cols)  // interior blocks see the exact shift
        CHECK(mv.at(r, c) == MotionVector{0, 1});
    }
  }
}

TEST_CASE("estimate_motion: constant frames tie everywhere, (0,0) wins") {
  const Frame prev(16, 16, 80);
  const Frame cur(16, 16, 200);
  const MotionVectorField mv = estimate_motion(prev, cur, 8, 7);
  for (const MotionVector& v : mv.vectors) CHECK(v == MotionVector{0, 0});
  // The tie is exhaustive: every in-window displacement leaves the same SAD,
  // so the oracle's tie rule must also land on (0,0).
  for (int r = 0; r < mv.rows; ++r)
    for (int c = 0; c < mv.cols; ++c)
      CHECK(oracles::full_search_block(prev, cur, r * 8, c * 8, 8, 7) ==
            MotionVector{0, 0});
}

TEST_CASE("estimate_motion: dimension errors") {
  const Frame a(16, 16), b(16, 8), c(12, 12);
  CHECK_THROWS_AS(estimate_motion(a, b, 8, 7), InvalidInput);
  CHECK_THROWS_AS(estimate_motion(c, c, 8, 7), InvalidInput);
}

TEST_CASE("predict: zero field is the identity") {
  const Frame f = oracles::random_frame(24, 24, 3);
  MotionVectorField mv;
  mv.block_size = 8;
  mv.rows = 3;
  mv.cols = 3;
  mv.vectors.assign(9, {0, 0});
  CHECK(predict(f, mv) == f);
}

TEST_CASE("predict: single-block (0,1) copies from one column right") {
  Frame f(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) f.at(y, x) = static_cast<uint8_t>(y * 8 + x);
  MotionVectorField mv;
  mv.block_size = 8;
  mv.rows = 1;
  mv.cols = 1;
  mv.vectors = {{0, 1}};
  const Frame p = predict(f, mv);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 7; ++x) CHECK(p.at(y, x) == f.at(y, x + 1));
    CHECK(p.at(y, 7) == f.at(y, 7));  // edge clamp
  }
}

TEST_CASE("predict composed with self-estimation is the identity") {
  const Frame f = oracles::random_frame(32, 32, 4);
  CHECK(predict(f, estimate_motion(f, f, 8, 7)) == f);
}

TEST_CASE("predict: grid mismatch error") {
  const Frame f(16, 16);
  MotionVectorField mv;
  mv.block_size = 8;
  mv.rows = 1;
  mv.cols = 2;
  mv.vectors.assign(2, {0, 0});
  CHECK_THROWS_AS(predict(f, mv), InvalidInput);
}

TEST_CASE("residual: zero, extremes, and the subtraction oracle") {
  const Frame f = oracles::random_frame(16, 16, 5);
  const ResidualFrame zero = residual(f, f);
  for (int16_t v : zero.values) CHECK(v == 0);

  const Frame white(8, 8, 255), black(8, 8, 0);
  const ResidualFrame extreme = residual(white, black);
  for (int16_t v : extreme.values) CHECK(v == 255);

  const Frame a = oracles::random_frame(8, 8, 6);
  const Frame b = oracles::random_frame(8, 8, 7);
  const ResidualFrame r = residual(a, b);
  for (size_t i = 0; i < r.values.size(); ++i) {
    CHECK(r.values[i] == static_cast<int>(a.samples[i]) - b.samples[i]);
    CHECK(r.values[i] >= -255);
    CHECK(r.values[i] <= 255);
  }

  CHECK_THROWS_AS(residual(Frame(8, 8), Frame(8, 16)), InvalidInput);
}

TEST_CASE("encode_layers: zero residual compresses to almost nothing") {
  const ResidualFrame r(64, 64);
  const LayeredBitstream b = encode_layers(r, 3, 4);
  CHECK(b.num_layers() == 3);
  size_t payload = 0;
  for (const Layer& l : b.layers) payload += l.payload.size();
  CHECK(payload < r.values.size() * 2 / 100);  // < 1% of raw residual bytes
  const ResidualFrame back = decode_layers(b, 3);
  for (int16_t v : back.values) CHECK(v == 0);
}

TEST_CASE("encode_layers: K=1 step=1 is the identity code") {
  ResidualFrame r(8, 8);
  SplitMix64 rng(8);
  for (auto& v : r.values)
    v = static_cast<int16_t>(static_cast<int>(rng.next_below(511)) - 255);
  const LayeredBitstream b = encode_layers(r, 1, 1);
  CHECK(b.layers[0].step == 1);
  CHECK(decode_layers(b, 1) == r);
}

TEST_CASE("encode_layers: reconstruction follows the requantization oracle") {
  ResidualFrame r(16, 16);
  SplitMix64 rng(9);
  for (auto& v : r.values)
    v = static_cast<int16_t>(static_cast<int>(rng.next_below(511)) - 255);

  const LayeredBitstream b = encode_layers(r, 4, 8);
  const auto expected = oracles::requantize_layers(r.values, 4, 8);
  double prev_mse = 1e18;
  for (uint32_t k = 1; k <= 4; ++k) {
    const ResidualFrame got = decode_layers(b, k);
    double mse = 0;
    for (size_t i = 0; i < r.values.size(); ++i) {
      CHECK(got.values[i] == expected[k - 1][i]);
      const double d = got.values[i] - r.values[i];
      mse += d * d;
    }
    mse /= static_cast<double>(r.values.size());
    CHECK(mse <= prev_mse);
    prev_mse = mse;
    // Quantizer error at step s is at most s/2 per sample.
    const double step = b.layers[k - 1].step;
    CHECK(mse <= step * step / 4.0 + 1e-12);
  }
  CHECK(decode_layers(b, 4) == r);  // final step 1 reconstructs exactly
}

TEST_CASE("encode_layers/decode_layers: parameter validation") {
  const ResidualFrame r(8, 8);
  CHECK_THROWS_AS(encode_layers(r, 0, 8), InvalidInput);
  CHECK_THROWS_AS(encode_layers(r, 2, 3), InvalidInput);   // not a power of two
  CHECK_THROWS_AS(encode_layers(r, 5, 8), InvalidInput);   // steps would repeat
  const LayeredBitstream b = encode_layers(r, 2, 2);
  CHECK_THROWS_AS(decode_layers(b, 0), InvalidInput);
  CHECK_THROWS_AS(decode_layers(b, 3), InvalidInput);
}

TEST_CASE("decode_layers: corrupt payloads raise decode errors") {
  ResidualFrame r(8, 8);
  r.values[0] = 100;
  LayeredBitstream b = encode_layers(r, 1, 1);
  // A run-length token that overruns the sample count.
  ByteWriter w;
  w.varint(1000);
  w.svarint(5);
  b.layers[0].payload = w.take();
  CHECK_THROWS_AS(decode_layers(b, 1), DecodeError);
  // Truncated varint.
  b.layers[0].payload = {0x80};
  CHECK_THROWS_AS(decode_layers(b, 1), DecodeError);
}

TEST_CASE("encode_gop: a static scene collapses after the anchor") {
  const Frame base = oracles::random_frame(64, 64, 10);
  std::vector<Frame> frames(10, base);
  CodecParams params;
  const EncodedGop g = encode_gop(frames, params);
  CHECK(g.records.size() == 9);

  size_t non_anchor = 0;
  for (const GopRecord& rec : g.records) {
    size_t rec_bytes = 0;
    for (const Layer& l : rec.residual.layers) rec_bytes += l.payload.size();
    non_anchor += rec_bytes + 4;  // generous framing allowance
  }
  const size_t raw = frames.size() * base.pixel_count();
  CHECK(non_anchor < raw * 5 / 100);

  const auto decoded = decode_gop(g, params.num_layers);
  for (const Frame& f : decoded) CHECK(f == base);
}

TEST_CASE("encode_gop/decode_gop: lossless round-trip on random clips") {
  CodecParams params;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const auto frames = random_clip(32, 16, 6, seed);
    const EncodedGop g = encode_gop(frames, params);
    const auto decoded = decode_gop(g, params.num_layers);
    REQUIRE(decoded.size() == frames.size());
    for (size_t i = 0; i < frames.size(); ++i) CHECK(decoded[i] == frames[i]);
  }
}

TEST_CASE("encode_gop: translating pattern recovers the injected shift") {
  Frame prev(64, 64);
  SplitMix64 rng(12);
  for (auto& s : prev.samples) s = static_cast<uint8_t>(rng.next_below(256));
  const Frame cur = shift_window_right(prev);
  CodecParams params;
  const EncodedGop g = encode_gop(std::vector<Frame>{prev, cur}, params);
  const MotionVectorField& mv = g.records[0].mv;
  for (int r = 0; r < mv.rows; ++r)
    for (int c = 0; c + 1 < mv.cols; ++c)
      CHECK(mv.at(r, c) == MotionVector{0, 1});
}

TEST_CASE("encode_gop: closed loop, encoder recon equals decoder output") {
  // Lossy parameters on a moving scene: drift would show up as a mismatch
  // between the encoder's reconstruction and the decoder's.
  CodecParams params;
  params.num_layers = 2;
  params.base_step = 8;  // final step 4: lossy
  const auto frames = random_clip(32, 32, 8, 99);
  std::vector<Frame> encoder_recon;
  const EncodedGop g = encode_gop(frames, params, &encoder_recon);
  const auto decoded = decode_gop(g, params.num_layers);
  REQUIRE(encoder_recon.size() == decoded.size());
  for (size_t i = 0; i < decoded.size(); ++i)
    CHECK(decoded[i] == encoder_recon[i]);
}

TEST_CASE("encode_gop: input validation") {
  CodecParams params;
  CHECK_THROWS_AS(encode_gop({}, params), InvalidInput);
  std::vector<Frame> mixed = {Frame(16, 16), Frame(8, 8)};
  CHECK_THROWS_AS(encode_gop(mixed, params), InvalidInput);
  std::vector<Frame> too_many(params.anchor_interval + 1, Frame(16, 16));
  CHECK_THROWS_AS(encode_gop(too_many, params), InvalidInput);
}

TEST_CASE("gop serialization: round-trip and header checks") {
  CodecParams params;
  const auto frames = random_clip(16, 16, 4, 13);
  const EncodedGop g = encode_gop(frames, params);
  const Bytes bytes = serialize_gop(g);
  CHECK(bytes[0] == 'S');
  CHECK(bytes[1] == 'G');
  CHECK(bytes[2] == 'O');
  CHECK(bytes[3] == 'P');
  const EncodedGop back = parse_gop(bytes);
  CHECK(back == g);
  const auto decoded = decode_gop(back, params.num_layers);
  for (size_t i = 0; i < frames.size(); ++i) CHECK(decoded[i] == frames[i]);
}

TEST_CASE("gop serialization: corruption is detected") {
  CodecParams params;
  const auto frames = random_clip(16, 16, 3, 14);
  Bytes bytes = serialize_gop(encode_gop(frames, params));
  Bytes truncated(bytes.begin(), bytes.begin() + bytes.size() / 2);
  CHECK_THROWS_AS(parse_gop(truncated), DecodeError);
  bytes[0] = 'X';
  CHECK_THROWS_AS(parse_gop(bytes), DecodeError);
}

TEST_CASE("rle: zero-run coding round-trips and rejects zero tokens") {
  const std::vector<int32_t> vals = {0, 0, 5, -3, 0, 0, 0, 1, 0, 0};
  const Bytes enc = rle_encode(vals);
  CHECK(rle_decode(enc, vals.size()) == vals);
  CHECK(rle_decode({}, 4) == std::vector<int32_t>(4, 0));
}

TEST_CASE("rle: hostile payloads cannot blow up the decoder") {
  // Zero-run near 2^64 must not wrap the bounds check.
  ByteWriter w;
  w.varint(UINT64_MAX - 1);
  w.svarint(1);
  CHECK_THROWS_AS(rle_decode(w.data(), 16), DecodeError);
  // Values outside the sane coefficient range are rejected.
  ByteWriter w2;
  w2.varint(0);
  w2.svarint(1 << 20);
  CHECK_THROWS_AS(rle_decode(w2.data(), 16), DecodeError);
}
