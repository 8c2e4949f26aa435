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

#include "salt/autoenc.hpp"

#include <cmath>
#include <string>

#include "salt/errors.hpp"
#include "salt/rng.hpp"

namespace salt::autoenc {

namespace {

ConvLayer make_conv(int in_ch, int out_ch, SplitMix64& rng) {
  ConvLayer l;
  l.in_channels = in_ch;
  l.out_channels = out_ch;
  l.weights.resize(static_cast<size_t>(in_ch) * out_ch * 9);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_ch) * 9);
  for (double& w : l.weights) w = (rng.next_double() - 0.5) * 2.0 * scale;
  return l;
}

// Valid 3x3 stride-2 convolution followed by a rectifier.
std::vector<std::vector<double>> conv_forward(
    const std::vector<std::vector<double>>& in, int h, int w,
    const ConvLayer& layer, int& out_h, int& out_w) {
  out_h = (h - 3) / 2 + 1;
  out_w = (w - 3) / 2 + 1;
  std::vector<std::vector<double>> out(
      layer.out_channels,
      std::vector<double>(static_cast<size_t>(out_h) * out_w, 0.0));
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    for (int oy = 0; oy < out_h; ++oy) {
      for (int ox = 0; ox < out_w; ++ox) {
        double acc = 0.0;
        for (int ic = 0; ic < layer.in_channels; ++ic) {
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) {
              acc += layer.w(oc, ic, ky, kx) *
                     in[ic][static_cast<size_t>(oy * 2 + ky) * w + ox * 2 + kx];
            }
          }
        }
        out[oc][static_cast<size_t>(oy) * out_w + ox] = acc > 0.0 ? acc : 0.0;
      }
    }
  }
  return out;
}

}  // namespace

FeatureExtractor make_extractor(uint64_t seed) {
  FeatureExtractor ex;
  ex.seed = seed;
  SplitMix64 r1 = stream_rng(seed, "conv1");
  SplitMix64 r2 = stream_rng(seed, "conv2");
  ex.conv1 = make_conv(1, 8, r1);
  ex.conv2 = make_conv(8, kFeatureDim, r2);
  return ex;
}

FeatureVector extract_features(const codec::Frame& frame,
                               const FeatureExtractor& ex) {
  if (frame.width < kMinExtractorDim || frame.height < kMinExtractorDim)
    throw InvalidInput("extract_features: frame too small for the extractor");

  std::vector<std::vector<double>> plane(1);
  plane[0].reserve(frame.pixel_count());
  for (uint8_t s : frame.samples) plane[0].push_back(s / 255.0);

  int h1 = 0, w1 = 0, h2 = 0, w2 = 0;
  const auto f1 = conv_forward(plane, frame.height, frame.width, ex.conv1, h1, w1);
  const auto f2 = conv_forward(f1, h1, w1, ex.conv2, h2, w2);

  FeatureVector out(kFeatureDim, 0.0);
  const double inv = 1.0 / (static_cast<double>(h2) * w2);
  for (int c = 0; c < kFeatureDim; ++c) {
    double acc = 0.0;
    for (double v : f2[c]) acc += v;
    out[c] = acc * inv;
  }
  return out;
}

FeatureVector extract_features(const codec::Frame& frame,
                               const AutoencoderWeights& w) {
  return extract_features(frame, w.extractor);
}

std::vector<double> encoder_input(const std::vector<codec::Frame>& clip,
                                  size_t t, const AutoencoderWeights& w,
                                  int block_size, int search_radius) {
  const codec::Frame& f = clip[t];
  std::vector<double> x = extract_features(f, w.extractor);
  const size_t blocks = (static_cast<size_t>(f.height) / block_size) *
                        (static_cast<size_t>(f.width) / block_size);
  x.reserve(kFeatureDim + blocks * 2);
  if (t == 0) {
    x.insert(x.end(), blocks * 2, 0.0);
  } else {
    const auto mv =
        codec::estimate_motion(clip[t - 1], f, block_size, search_radius);
    const double inv = 1.0 / std::max(search_radius, 1);
    for (const codec::MotionVector& v : mv.vectors) {
      x.push_back(v.dy * inv);
      x.push_back(v.dx * inv);
    }
  }
  return x;
}

namespace {

void check_clips(std::span<const std::vector<codec::Frame>> clips,
                 int block_size) {
  if (clips.empty()) throw InvalidInput("train_autoencoder: no clips");
  const codec::Frame* first = nullptr;
  for (const auto& clip : clips) {
    if (clip.empty()) throw InvalidInput("train_autoencoder: empty clip");
    for (const auto& f : clip) {
      if (!first) first = &f;
      if (f.width != first->width || f.height != first->height)
        throw InvalidInput("train_autoencoder: clips must share dimensions");
      if (f.width % block_size != 0 || f.height % block_size != 0)
        throw InvalidInput("train_autoencoder: block size must divide dimensions");
    }
  }
}

}  // namespace

LossGrad loss_and_gradients(std::span<const std::vector<codec::Frame>> clips,
                            const AutoencoderWeights& w, int block_size,
                            int search_radius) {
  const size_t d_in = w.encoder.rows;
  const size_t code = w.encoder.cols;
  const size_t pix = w.decoder.cols;

  LossGrad g;
  g.d_encoder = Matrix(d_in, code);
  g.d_decoder = Matrix(code, pix);

  std::vector<double> z(code);
  std::vector<double> resid(pix);
  std::vector<double> rD(code);

  for (const auto& clip : clips) {
    for (size_t t = 0; t < clip.size(); ++t) {
      const std::vector<double> x =
          encoder_input(clip, t, w, block_size, search_radius);
      // z = x E
      for (size_t j = 0; j < code; ++j) {
        double acc = 0.0;
        for (size_t i = 0; i < d_in; ++i) acc += x[i] * w.encoder.at(i, j);
        z[j] = acc;
      }
      // resid = z D - target
      for (size_t p = 0; p < pix; ++p) {
        double acc = 0.0;
        for (size_t j = 0; j < code; ++j) acc += z[j] * w.decoder.at(j, p);
        resid[p] = acc - clip[t].samples[p] / 255.0;
        g.loss += resid[p] * resid[p];
      }
      // dD += 2 z^T resid
      for (size_t j = 0; j < code; ++j)
        for (size_t p = 0; p < pix; ++p)
          g.d_decoder.at(j, p) += 2.0 * z[j] * resid[p];
      // dE += 2 x^T (resid D^T)
      for (size_t j = 0; j < code; ++j) {
        double acc = 0.0;
        for (size_t p = 0; p < pix; ++p) acc += resid[p] * w.decoder.at(j, p);
        rD[j] = acc;
      }
      for (size_t i = 0; i < d_in; ++i)
        for (size_t j = 0; j < code; ++j)
          g.d_encoder.at(i, j) += 2.0 * x[i] * rD[j];
    }
  }
  return g;
}

TrainResult train_autoencoder(std::span<const std::vector<codec::Frame>> clips,
                              const TrainConfig& cfg) {
  if (cfg.learning_rate < 0) throw InvalidInput("learning rate must be >= 0");
  check_clips(clips, cfg.block_size);

  const codec::Frame& f0 = clips[0][0];
  const size_t blocks = (static_cast<size_t>(f0.height) / cfg.block_size) *
                        (static_cast<size_t>(f0.width) / cfg.block_size);
  const size_t d_in = kFeatureDim + blocks * 2;
  const size_t pix = f0.pixel_count();

  TrainResult res;
  res.weights.extractor = make_extractor(cfg.seed);
  res.weights.learning_rate = cfg.learning_rate;
  res.weights.epochs = cfg.epochs;
  res.weights.encoder = Matrix(d_in, cfg.code_dim);
  res.weights.decoder = Matrix(cfg.code_dim, pix);

  SplitMix64 wrng = stream_rng(cfg.seed, "coder-init");
  for (double& v : res.weights.encoder.v) v = (wrng.next_double() - 0.5) * 0.1;
  for (double& v : res.weights.decoder.v) v = (wrng.next_double() - 0.5) * 0.1;

  LossGrad g = loss_and_gradients(clips, res.weights, cfg.block_size,
                                  cfg.search_radius);
  res.loss_trace.push_back(g.loss);
  for (uint32_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (!std::isfinite(g.loss))
      throw DivergenceError("training diverged at epoch " +
                            std::to_string(epoch - 1));
    for (size_t i = 0; i < res.weights.encoder.v.size(); ++i)
      res.weights.encoder.v[i] -= cfg.learning_rate * g.d_encoder.v[i];
    for (size_t i = 0; i < res.weights.decoder.v.size(); ++i)
      res.weights.decoder.v[i] -= cfg.learning_rate * g.d_decoder.v[i];
    g = loss_and_gradients(clips, res.weights, cfg.block_size,
                           cfg.search_radius);
    if (!std::isfinite(g.loss))
      throw DivergenceError("training diverged at epoch " +
                            std::to_string(epoch));
    res.loss_trace.push_back(g.loss);
  }
  return res;
}

}  // namespace salt::autoenc
