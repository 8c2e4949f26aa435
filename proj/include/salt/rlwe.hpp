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
#include <span>
#include <string_view>
#include <vector>

#include "salt/bytes.hpp"
#include "salt/rng.hpp"

namespace salt::rlwe {

// Ring parameters for Z_q[x]/(x^n + 1). The defaults are the working point
// of the whole pipeline: degree 256 with a 13-bit modulus whose shape
// 2^13 - 2^9 + 1 feeds the shift-fold reducer, and Gaussian noise narrow
// enough that every sample fits a signed 6-bit register.
struct RingParams {
  uint32_t n = 256;
  uint32_t q = 7681;
  double sigma = 3.2;
  int32_t tailcut = 31;

  void validate() const;
  uint32_t half_q() const { return q / 2; }          // message amplitude
  uint32_t quarter_q() const { return q / 4; }       // decode threshold
};

// Polynomial with coefficients reduced into [0, q).
struct RingPoly {
  std::vector<uint32_t> c;

  bool operator==(const RingPoly&) const = default;
};

// Small polynomial with coefficients in [-tailcut, tailcut].
struct SignedPoly {
  std::vector<int32_t> c;

  bool operator==(const SignedPoly&) const = default;
};

// 256-bit message, one bit per coefficient slot.
struct Plaintext {
  std::vector<uint8_t> bits;  // each 0 or 1

  bool operator==(const Plaintext&) const = default;
};

struct PublicKey {
  RingPoly a;  // uniform
  RingPoly b;  // a*s + e
};

using KeyId = std::array<uint8_t, 16>;

struct KeyPair {
  PublicKey pk;
  SignedPoly s;
  KeyId id;
};

struct Ciphertext {
  RingPoly c1;
  RingPoly c2;

  bool operator==(const Ciphertext&) const = default;
};

// Discrete Gaussian over the integers, truncated at +/-tailcut, sampled by
// inversion from a precomputed cumulative table. Deterministic given the
// generator state.
class GaussianSampler {
 public:
  explicit GaussianSampler(const RingParams& params);

  int32_t sample(SplitMix64& rng) const;
  SignedPoly sample_poly(SplitMix64& rng, uint32_t n) const;

  // Exact moments of the truncated table, for statistical checks.
  double table_mean() const;
  double table_variance() const;

 private:
  int32_t tailcut_;
  std::vector<double> cdf_;  // over support -tailcut..tailcut
};

// n truncated-Gaussian draws, deterministic given (seed, stream label).
SignedPoly sample_gaussian_signed(const RingParams& params, uint64_t seed,
                                  std::string_view stream);

// Uniform polynomial over [0, q), by rejection from 13-bit draws.
RingPoly sample_uniform(const RingParams& params, SplitMix64& rng);

KeyPair keygen(const RingParams& params, uint64_t seed);

// Coefficient i = bit_i * floor(q/2).
RingPoly encode_message(const Plaintext& m, const RingParams& params);
// Bit i = 1 when coefficient i lies within q/4 of floor(q/2) on the circle.
Plaintext decode_message(const RingPoly& p, const RingParams& params);

// c1 = a*r + e1, c2 = b*r + e2 + encode(m); r, e1, e2 are fresh Gaussian
// streams derived from (seed, "r"/"e1"/"e2"). Both products run through the
// lane-model multiplier.
Ciphertext encrypt(const Plaintext& m, const PublicKey& pk,
                   const RingParams& params, uint64_t seed);

// decode(c2 - c1*s). A wrong key yields garbage bits, not an error.
Plaintext decrypt(const Ciphertext& ct, const SignedPoly& s,
                  const RingParams& params);

// Centered representative of v in (-q/2, q/2].
int32_t center(uint32_t v, uint32_t q);

// Lift a small signed polynomial into [0, q).
RingPoly lift(const SignedPoly& s, const RingParams& params);

// --- Serialization ("SLWE") -------------------------------------------------
//
// Header: magic "SLWE", version byte, n and q as 16-bit little-endian, kind
// byte. Coefficients are packed 13-bit little-endian bit-fields, zero-padded
// to a byte boundary. A key pair payload is id(16) + a + b + s-lifted;
// a ciphertext payload is c1 + c2.

inline constexpr uint8_t kSlweVersion = 1;
inline constexpr uint8_t kKindKeyPair = 1;
inline constexpr uint8_t kKindCiphertext = 2;

void pack_poly13(ByteWriter& w, const RingPoly& p);
RingPoly unpack_poly13(ByteReader& r, uint32_t n, uint32_t q);

Bytes serialize_keypair(const KeyPair& kp, const RingParams& params);
KeyPair parse_keypair(std::span<const uint8_t> data, const RingParams& params);

Bytes serialize_ciphertext(const Ciphertext& ct, const RingParams& params);
Ciphertext parse_ciphertext(std::span<const uint8_t> data,
                            const RingParams& params);

KeyId derive_key_id(const PublicKey& pk, const RingParams& params);

}  // namespace salt::rlwe
