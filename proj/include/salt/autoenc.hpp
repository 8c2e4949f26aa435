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

#include "salt/codec.hpp"

namespace salt::autoenc {

using FeatureVector = std::vector<double>;

inline constexpr int kFeatureDim = 16;

// Fixed-seed convolution stack standing in for the frozen backbone: two
// valid 3x3 stride-2 layers (1->8 then 8->16 channels, rectifier after
// each, no bias), mean-pooled per channel to a 16-component vector.
// Input samples are scaled to [0, 1] before the first layer. Weights are
// generated once from the seed and never change.
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  std::vector<double> weights;  // [out][in][3][3]

  double w(int oc, int ic, int ky, int kx) const {
    return weights[((static_cast<size_t>(oc) * in_channels + ic) * 3 + ky) * 3 + kx];
  }

  bool operator==(const ConvLayer&) const = default;
};

struct FeatureExtractor {
  uint64_t seed = 0;
  ConvLayer conv1;
  ConvLayer conv2;

  bool operator==(const FeatureExtractor&) const = default;
};

FeatureExtractor make_extractor(uint64_t seed);

// Smallest frame the two valid stride-2 layers can consume.
inline constexpr int kMinExtractorDim = 7;

// Dense row-major matrix, just big enough for the linear coder.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& at(size_t r, size_t c) { return v[r * cols + c]; }
  double at(size_t r, size_t c) const { return v[r * cols + c]; }

  bool operator==(const Matrix&) const = default;
};

// Linear coder around the frozen extractor. The encoder consumes the
// frame's extracted features with the motion field components appended
// (zeroes for the first frame of a clip); the decoder maps the code back
// to full frame pixels. Pixels are scaled to [0, 1] and motion components
// by the search radius.
struct AutoencoderWeights {
  FeatureExtractor extractor;
  Matrix encoder;  // (feature_dim + motion_dim) x code_dim
  Matrix decoder;  // code_dim x pixel_count
  double learning_rate = 0.0;
  uint32_t epochs = 0;
};

struct TrainConfig {
  uint32_t epochs = 10;
  double learning_rate = 1e-3;
  uint64_t seed = 0;
  uint32_t code_dim = 16;
  int block_size = 8;
  int search_radius = 7;
};

struct TrainResult {
  AutoencoderWeights weights;
  // loss_trace[0] is the loss at initialization; one more entry per epoch.
  std::vector<double> loss_trace;
};

FeatureVector extract_features(const codec::Frame& frame,
                               const AutoencoderWeights& w);
FeatureVector extract_features(const codec::Frame& frame,
                               const FeatureExtractor& ex);

// Full-batch gradient descent on the summed squared frame reconstruction
// error; only the encoder and decoder matrices move. Throws DivergenceError
// naming the epoch if the loss stops being finite.
TrainResult train_autoencoder(std::span<const std::vector<codec::Frame>> clips,
                              const TrainConfig& cfg);

// Encoder input for frame t of a clip (features + scaled motion), exposed
// for gradient checks.
std::vector<double> encoder_input(const std::vector<codec::Frame>& clip,
                                  size_t t, const AutoencoderWeights& w,
                                  int block_size, int search_radius);

// Loss and gradients at the given weights, for the finite-difference oracle.
struct LossGrad {
  double loss = 0.0;
  Matrix d_encoder;
  Matrix d_decoder;
};
LossGrad loss_and_gradients(std::span<const std::vector<codec::Frame>> clips,
                            const AutoencoderWeights& w, int block_size,
                            int search_radius);

}  // namespace salt::autoenc
