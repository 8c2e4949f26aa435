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

#include "salt/codec.hpp"

#include <algorithm>
#include <cstdlib>

#include "salt/errors.hpp"

namespace salt::codec {

namespace {

void check_same_dims(const Frame& a, const Frame& b, const char* what) {
  if (a.width != b.width || a.height != b.height)
    throw InvalidInput(std::string(what) + ": frame dimension mismatch");
}

int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

void CodecParams::validate() const {
  if (block_size <= 0 || search_radius < 0)
    throw InvalidInput("block size and search radius must be positive");
  if (num_layers == 0) throw InvalidInput("layer count must be at least 1");
  if (base_step == 0 || (base_step & (base_step - 1)) != 0)
    throw InvalidInput("base step must be a power of two");
  if (num_layers > 1 && base_step < (1u << (num_layers - 1)))
    throw InvalidInput("steps must decrease strictly: base_step >= 2^(K-1)");
  if (anchor_interval == 0 || anchor_interval > 255)
    throw InvalidInput("anchor interval must be in [1, 255]");
}

uint32_t CodecParams::layer_step(uint32_t k) const {
  return std::max(base_step >> (k - 1), 1u);
}

// --- Frame operations ---------------------------------------------------------

MotionVectorField estimate_motion(const Frame& prev, const Frame& cur,
                                  int block_size, int search_radius) {
  check_same_dims(prev, cur, "estimate_motion");
  if (block_size <= 0 || cur.width % block_size != 0 ||
      cur.height % block_size != 0)
    throw InvalidInput("estimate_motion: block size must divide both dimensions");

  MotionVectorField field;
  field.block_size = static_cast<uint16_t>(block_size);
  field.rows = static_cast<uint16_t>(cur.height / block_size);
  field.cols = static_cast<uint16_t>(cur.width / block_size);
  field.vectors.resize(static_cast<size_t>(field.rows) * field.cols);

  auto sad = [&](int by, int bx, int dy, int dx) {
    int64_t acc = 0;
    for (int y = 0; y < block_size; ++y) {
      const uint8_t* c = &cur.samples[static_cast<size_t>(by + y) * cur.width + bx];
      const uint8_t* p =
          &prev.samples[static_cast<size_t>(by + y + dy) * prev.width + bx + dx];
      for (int x = 0; x < block_size; ++x)
        acc += std::abs(static_cast<int>(c[x]) - static_cast<int>(p[x]));
    }
    return acc;
  };

  for (int r = 0; r < field.rows; ++r) {
    for (int c = 0; c < field.cols; ++c) {
      const int by = r * block_size;
      const int bx = c * block_size;
      // Displacements are clamped so the source block stays inside the
      // reference frame.
      const int dy_lo = -std::min(search_radius, by);
      const int dy_hi = std::min(search_radius, cur.height - block_size - by);
      const int dx_lo = -std::min(search_radius, bx);
      const int dx_hi = std::min(search_radius, cur.width - block_size - bx);

      int64_t best = sad(by, bx, 0, 0);
      MotionVector best_mv{0, 0};
      for (int dy = dy_lo; dy <= dy_hi; ++dy) {
        for (int dx = dx_lo; dx <= dx_hi; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int64_t cost = sad(by, bx, dy, dx);
          // Strict improvement only: (0,0) wins ties, and scanning in
          // lexicographic order makes the smallest (dy, dx) win the rest.
          if (cost < best) {
            best = cost;
            best_mv = {static_cast<int16_t>(dy), static_cast<int16_t>(dx)};
          }
        }
      }
      field.at(r, c) = best_mv;
    }
  }
  return field;
}

Frame predict(const Frame& prev, const MotionVectorField& mv) {
  if (mv.block_size == 0 ||
      static_cast<int>(mv.rows) * mv.block_size != prev.height ||
      static_cast<int>(mv.cols) * mv.block_size != prev.width)
    throw InvalidInput("predict: motion grid does not match frame dimensions");

  Frame out(prev.width, prev.height);
  const int bs = mv.block_size;
  for (int r = 0; r < mv.rows; ++r) {
    for (int c = 0; c < mv.cols; ++c) {
      const MotionVector v = mv.at(r, c);
      for (int y = 0; y < bs; ++y) {
        const int sy = clampi(r * bs + y + v.dy, 0, prev.height - 1);
        for (int x = 0; x < bs; ++x) {
          const int sx = clampi(c * bs + x + v.dx, 0, prev.width - 1);
          out.at(r * bs + y, c * bs + x) = prev.at(sy, sx);
        }
      }
    }
  }
  return out;
}

ResidualFrame residual(const Frame& cur, const Frame& predicted) {
  check_same_dims(cur, predicted, "residual");
  ResidualFrame r(cur.width, cur.height);
  for (size_t i = 0; i < cur.samples.size(); ++i)
    r.values[i] = static_cast<int16_t>(static_cast<int>(cur.samples[i]) -
                                       static_cast<int>(predicted.samples[i]));
  return r;
}

Frame apply_residual(const Frame& predicted, const ResidualFrame& r) {
  if (predicted.width != r.width || predicted.height != r.height)
    throw InvalidInput("apply_residual: dimension mismatch");
  Frame out(predicted.width, predicted.height);
  for (size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = static_cast<uint8_t>(
        clampi(static_cast<int>(predicted.samples[i]) + r.values[i], 0, 255));
  return out;
}

// --- Run-length coding ----------------------------------------------------------

Bytes rle_encode(std::span<const int32_t> values) {
  ByteWriter w;
  uint64_t zeros = 0;
  for (int32_t v : values) {
    if (v == 0) {
      ++zeros;
      continue;
    }
    w.varint(zeros);
    w.svarint(v);
    zeros = 0;
  }
  // Trailing zeros are implied by the element count.
  return w.take();
}

std::vector<int32_t> rle_decode(std::span<const uint8_t> payload, size_t count) {
  ByteReader r(payload);
  std::vector<int32_t> out;
  out.reserve(count);
  while (!r.done()) {
    const uint64_t zeros = r.varint();
    const int64_t value = r.svarint();
    if (value == 0) throw DecodeError("run-length token with zero value");
    if (value > 0xffff || value < -0xffff)
      throw DecodeError("run-length value out of range");
    // zeros can be an arbitrary varint; compare against the remaining room
    // without forming zeros + 1.
    if (zeros >= count - out.size())
      throw DecodeError("run-length payload overruns element count");
    out.insert(out.end(), static_cast<size_t>(zeros), 0);
    out.push_back(static_cast<int32_t>(value));
  }
  out.resize(count, 0);
  return out;
}

// --- Layered coding ----------------------------------------------------------

LayeredBitstream encode_layers(const ResidualFrame& r, uint32_t num_layers,
                               uint32_t base_step) {
  CodecParams check;
  check.num_layers = num_layers;
  check.base_step = base_step;
  check.validate();

  LayeredBitstream b;
  b.width = r.width;
  b.height = r.height;
  b.layers.reserve(num_layers);

  std::vector<int32_t> rem(r.values.begin(), r.values.end());
  std::vector<int32_t> quantized(rem.size());
  for (uint32_t k = 1; k <= num_layers; ++k) {
    const uint32_t step = check.layer_step(k);
    const int32_t istep = static_cast<int32_t>(step);
    for (size_t i = 0; i < rem.size(); ++i) {
      // Round half away from zero; step is a power of two so the bias
      // term is exact in integers.
      const int32_t mag = std::abs(rem[i]);
      const int32_t q = (mag + istep / 2) / istep;
      quantized[i] = rem[i] < 0 ? -q : q;
      rem[i] -= quantized[i] * istep;
    }
    Layer layer;
    layer.step = static_cast<uint16_t>(step);
    layer.payload = rle_encode(quantized);
    b.layers.push_back(std::move(layer));
  }
  return b;
}

ResidualFrame decode_layers(const LayeredBitstream& b, uint32_t k_max) {
  if (k_max == 0 || k_max > b.num_layers())
    throw InvalidInput("decode_layers: k_max out of range");
  ResidualFrame out(b.width, b.height);
  std::vector<int32_t> acc(out.values.size(), 0);
  for (uint32_t k = 0; k < k_max; ++k) {
    const Layer& layer = b.layers[k];
    const auto coeffs = rle_decode(layer.payload, acc.size());
    for (size_t i = 0; i < acc.size(); ++i)
      acc[i] += coeffs[i] * static_cast<int32_t>(layer.step);
  }
  for (size_t i = 0; i < acc.size(); ++i)
    out.values[i] = static_cast<int16_t>(acc[i]);
  return out;
}

// --- Group coding ---------------------------------------------------------------

namespace {

// Anchors go through the shared run-length coder at step 1, with a
// left-neighbor predictor in front (row starts predict from the row above)
// so flat and smooth content collapses into zero runs.
int32_t anchor_prediction(const Frame& f, int y, int x) {
  if (x > 0) return f.at(y, x - 1);
  if (y > 0) return f.at(y - 1, 0);
  return 0;
}

Bytes encode_anchor(const Frame& f) {
  std::vector<int32_t> deltas;
  deltas.reserve(f.pixel_count());
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      deltas.push_back(static_cast<int32_t>(f.at(y, x)) -
                       anchor_prediction(f, y, x));
  return rle_encode(deltas);
}

Frame decode_anchor(std::span<const uint8_t> payload, uint16_t w, uint16_t h) {
  Frame f(w, h);
  const auto deltas = rle_decode(payload, f.pixel_count());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int32_t v = anchor_prediction(f, y, x) + deltas[static_cast<size_t>(y) * w + x];
      if (v < 0 || v > 255) throw DecodeError("anchor sample out of range");
      f.at(y, x) = static_cast<uint8_t>(v);
    }
  }
  return f;
}

Bytes encode_motion(const MotionVectorField& mv) {
  std::vector<int32_t> comps;
  comps.reserve(mv.vectors.size() * 2);
  for (const MotionVector& v : mv.vectors) {
    comps.push_back(v.dy);
    comps.push_back(v.dx);
  }
  return rle_encode(comps);
}

MotionVectorField decode_motion(std::span<const uint8_t> payload, uint16_t w,
                                uint16_t h, uint16_t block_size) {
  MotionVectorField mv;
  mv.block_size = block_size;
  mv.rows = static_cast<uint16_t>(h / block_size);
  mv.cols = static_cast<uint16_t>(w / block_size);
  const size_t count = static_cast<size_t>(mv.rows) * mv.cols;
  const auto comps = rle_decode(payload, count * 2);
  mv.vectors.resize(count);
  for (size_t i = 0; i < count; ++i) {
    mv.vectors[i].dy = static_cast<int16_t>(comps[2 * i]);
    mv.vectors[i].dx = static_cast<int16_t>(comps[2 * i + 1]);
  }
  return mv;
}

}  // namespace

EncodedGop encode_gop(std::span<const Frame> frames, const CodecParams& params,
                      std::vector<Frame>* recon_out) {
  params.validate();
  if (frames.empty()) throw InvalidInput("encode_gop: empty frame sequence");
  if (frames.size() > params.anchor_interval)
    throw InvalidInput("encode_gop: group exceeds anchor interval");
  for (const Frame& f : frames) check_same_dims(frames[0], f, "encode_gop");
  if (frames[0].width % params.block_size != 0 ||
      frames[0].height % params.block_size != 0)
    throw InvalidInput("encode_gop: block size must divide frame dimensions");

  EncodedGop g;
  g.width = frames[0].width;
  g.height = frames[0].height;
  g.anchor_interval = static_cast<uint8_t>(params.anchor_interval);
  g.num_layers = static_cast<uint8_t>(params.num_layers);
  g.base_step = static_cast<uint8_t>(params.base_step);
  g.anchor_payload = encode_anchor(frames[0]);

  // Closed loop: the prediction reference is always the codec's own
  // reconstruction, so encoder and decoder never drift apart.
  Frame recon = frames[0];
  if (recon_out) {
    recon_out->clear();
    recon_out->push_back(recon);
  }
  for (size_t t = 1; t < frames.size(); ++t) {
    GopRecord rec;
    rec.mv = estimate_motion(recon, frames[t], params.block_size,
                             params.search_radius);
    const Frame pred = predict(recon, rec.mv);
    rec.residual = encode_layers(residual(frames[t], pred), params.num_layers,
                                 params.base_step);
    recon = apply_residual(pred, decode_layers(rec.residual, params.num_layers));
    if (recon_out) recon_out->push_back(recon);
    g.records.push_back(std::move(rec));
  }
  return g;
}

std::vector<Frame> decode_gop(const EncodedGop& g, uint32_t k_max) {
  if (k_max == 0 || k_max > g.num_layers)
    throw InvalidInput("decode_gop: k_max out of range");
  std::vector<Frame> frames;
  frames.reserve(g.records.size() + 1);
  frames.push_back(decode_anchor(g.anchor_payload, g.width, g.height));
  for (const GopRecord& rec : g.records) {
    const Frame pred = predict(frames.back(), rec.mv);
    frames.push_back(apply_residual(pred, decode_layers(rec.residual, k_max)));
  }
  return frames;
}

// --- Serialization ----------------------------------------------------------

Bytes serialize_gop(const EncodedGop& g) {
  ByteWriter w;
  w.magic("SGOP");
  w.u8(kGopVersion);
  w.u16(g.width);
  w.u16(g.height);
  w.u8(g.anchor_interval);
  w.u8(g.num_layers);
  w.u8(g.base_step);
  w.u32(static_cast<uint32_t>(g.anchor_payload.size()));
  w.bytes(g.anchor_payload);
  for (const GopRecord& rec : g.records) {
    ByteWriter rw;
    const Bytes mv = encode_motion(rec.mv);
    rw.u16(rec.mv.block_size);
    rw.varint(mv.size());
    rw.bytes(mv);
    for (const Layer& layer : rec.residual.layers) {
      rw.u16(layer.step);
      rw.varint(layer.payload.size());
      rw.bytes(layer.payload);
    }
    const Bytes body = rw.take();
    w.u32(static_cast<uint32_t>(body.size()));
    w.bytes(body);
  }
  return w.take();
}

EncodedGop parse_gop(std::span<const uint8_t> data) {
  ByteReader r(data);
  r.expect_magic("SGOP");
  if (r.u8() != kGopVersion) throw DecodeError("unsupported SGOP version");
  EncodedGop g;
  g.width = r.u16();
  g.height = r.u16();
  g.anchor_interval = r.u8();
  g.num_layers = r.u8();
  g.base_step = r.u8();
  if (g.width == 0 || g.height == 0 || g.num_layers == 0)
    throw DecodeError("SGOP header fields out of range");
  const uint32_t anchor_len = r.u32();
  const auto anchor = r.bytes(anchor_len);
  g.anchor_payload.assign(anchor.begin(), anchor.end());

  while (!r.done()) {
    const uint32_t len = r.u32();
    ByteReader rr(r.bytes(len));
    GopRecord rec;
    const uint16_t block_size = rr.u16();
    if (block_size == 0 || g.width % block_size != 0 || g.height % block_size != 0)
      throw DecodeError("SGOP record block size invalid");
    const uint64_t mv_len = rr.varint();
    rec.mv = decode_motion(rr.bytes(mv_len), g.width, g.height, block_size);
    rec.residual.width = g.width;
    rec.residual.height = g.height;
    for (uint32_t k = 0; k < g.num_layers; ++k) {
      Layer layer;
      layer.step = rr.u16();
      const uint64_t plen = rr.varint();
      const auto payload = rr.bytes(plen);
      layer.payload.assign(payload.begin(), payload.end());
      rec.residual.layers.push_back(std::move(layer));
    }
    if (!rr.done()) throw DecodeError("SGOP record has trailing bytes");
    g.records.push_back(std::move(rec));
    if (g.records.size() + 1 > g.anchor_interval)
      throw DecodeError("SGOP record count exceeds anchor interval");
  }
  return g;
}

}  // namespace salt::codec
