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
#include <span>
#include <vector>

#include "salt/bytes.hpp"

namespace salt::codec {

// Single-plane 8-bit frame, row-major. Multi-channel content is handled as
// independent planes.
struct Frame {
  uint16_t width = 0;
  uint16_t height = 0;
  std::vector<uint8_t> samples;

  Frame() = default;
  Frame(uint16_t w, uint16_t h, uint8_t fill = 0)
      : width(w), height(h), samples(static_cast<size_t>(w) * h, fill) {}

  uint8_t at(int y, int x) const { return samples[static_cast<size_t>(y) * width + x]; }
  uint8_t& at(int y, int x) { return samples[static_cast<size_t>(y) * width + x]; }
  size_t pixel_count() const { return samples.size(); }

  bool operator==(const Frame&) const = default;
};

struct MotionVector {
  int16_t dy = 0;
  int16_t dx = 0;

  bool operator==(const MotionVector&) const = default;
};

// Per-block displacements. Vector (dy, dx) names the source position of a
// block relative to its own position: prediction copies the reference block
// at (by + dy, bx + dx).
struct MotionVectorField {
  uint16_t block_size = 0;
  uint16_t rows = 0;
  uint16_t cols = 0;
  std::vector<MotionVector> vectors;  // rows * cols, row-major

  const MotionVector& at(int r, int c) const { return vectors[static_cast<size_t>(r) * cols + c]; }
  MotionVector& at(int r, int c) { return vectors[static_cast<size_t>(r) * cols + c]; }

  bool operator==(const MotionVectorField&) const = default;
};

// Signed difference between a frame and its prediction; values in
// [-255, 255].
struct ResidualFrame {
  uint16_t width = 0;
  uint16_t height = 0;
  std::vector<int16_t> values;

  ResidualFrame() = default;
  ResidualFrame(uint16_t w, uint16_t h)
      : width(w), height(h), values(static_cast<size_t>(w) * h, 0) {}

  bool operator==(const ResidualFrame&) const = default;
};

// One refinement layer: the quantizer step it was coded at, plus the
// run-length payload of its quantized coefficients.
struct Layer {
  uint16_t step = 0;
  Bytes payload;

  bool operator==(const Layer&) const = default;
};

// Residual coded as a pyramid of quantizer layers with strictly decreasing
// steps. A final step of 1 makes the stream lossless.
struct LayeredBitstream {
  uint16_t width = 0;
  uint16_t height = 0;
  std::vector<Layer> layers;

  uint32_t num_layers() const { return static_cast<uint32_t>(layers.size()); }
  bool lossless() const { return !layers.empty() && layers.back().step == 1; }

  bool operator==(const LayeredBitstream&) const = default;
};

struct CodecParams {
  int block_size = 8;
  int search_radius = 7;
  uint32_t num_layers = 4;   // K
  uint32_t base_step = 8;    // steps halve per layer: 8, 4, 2, 1
  uint32_t anchor_interval = 16;

  void validate() const;
  uint32_t layer_step(uint32_t k) const;  // k in [1, K]
  bool lossless() const { return layer_step(num_layers) == 1; }
};

struct GopRecord {
  MotionVectorField mv;
  LayeredBitstream residual;

  bool operator==(const GopRecord&) const = default;
};

// Anchor frame plus up to anchor_interval-1 predicted records.
struct EncodedGop {
  uint16_t width = 0;
  uint16_t height = 0;
  uint8_t anchor_interval = 0;
  uint8_t num_layers = 0;
  uint8_t base_step = 0;
  Bytes anchor_payload;  // anchor frame run-length coded at step 1
  std::vector<GopRecord> records;

  size_t frame_count() const { return records.size() + 1; }

  bool operator==(const EncodedGop&) const = default;
};

// --- Frame operations ---------------------------------------------------------

// Exhaustive block matching under sum of absolute differences. The search
// window is clamped so the source block stays inside the reference frame.
// Ties prefer (0,0), then the lexicographically smallest (dy, dx).
MotionVectorField estimate_motion(const Frame& prev, const Frame& cur,
                                  int block_size, int search_radius);

// Copies each block from its displaced source position; out-of-bounds reads
// are edge-clamped per sample.
Frame predict(const Frame& prev, const MotionVectorField& mv);

ResidualFrame residual(const Frame& cur, const Frame& predicted);

// Adds a decoded residual onto a prediction, clamping to [0, 255].
Frame apply_residual(const Frame& predicted, const ResidualFrame& r);

// --- Layered coding -----------------------------------------------------------

// Layer k quantizes whatever residual remains after reconstructing layers
// 1..k-1 (round half away from zero) and run-length codes it. Steps must
// decrease strictly, so base_step >= 2^(K-1) unless K == 1.
LayeredBitstream encode_layers(const ResidualFrame& r, uint32_t num_layers,
                               uint32_t base_step);

// Sum of the dequantized layers 1..k_max.
ResidualFrame decode_layers(const LayeredBitstream& b, uint32_t k_max);

// --- Group coding ---------------------------------------------------------------

// Frame 1 is coded losslessly as the anchor; every later frame stores a
// motion field against the codec's own reconstruction of its predecessor
// (closed loop) plus the layered residual. When recon_out is non-null it
// receives the encoder-side reconstructions, which the decoder at full
// depth reproduces byte for byte.
EncodedGop encode_gop(std::span<const Frame> frames, const CodecParams& params,
                      std::vector<Frame>* recon_out = nullptr);

std::vector<Frame> decode_gop(const EncodedGop& g, uint32_t k_max);

// --- Serialization ("SGOP") -----------------------------------------------------
//
// Little-endian: magic "SGOP", version byte, width/height as 16-bit,
// anchor_interval byte, K byte, base_step byte, anchor payload length
// (32-bit) + payload, then per-frame records each prefixed by a 32-bit
// length.

inline constexpr uint8_t kGopVersion = 1;

Bytes serialize_gop(const EncodedGop& g);
EncodedGop parse_gop(std::span<const uint8_t> data);

// Run-length coder shared by residual layers, motion fields and anchors:
// tokens of (zero-run varint, nonzero zigzag varint); trailing zeros are
// implied by the element count.
Bytes rle_encode(std::span<const int32_t> values);
std::vector<int32_t> rle_decode(std::span<const uint8_t> payload, size_t count);

}  // namespace salt::codec
