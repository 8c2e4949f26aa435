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

#include "salt/rlwe.hpp"

#include <cmath>
#include <cstdlib>

#include "salt/errors.hpp"
#include "salt/mulkern.hpp"

namespace salt::rlwe {

void RingParams::validate() const {
  if (n == 0 || n % 2 != 0) throw InvalidInput("ring degree must be positive and even");
  if (q < (1u << 12) || q >= (1u << 13)) throw InvalidInput("modulus must be 13-bit");
  if (sigma <= 0) throw InvalidInput("sigma must be positive");
  if (tailcut < 1 || tailcut > mulkern::kSignedMagLimit)
    throw InvalidInput("tailcut must fit a signed 6-bit register");
}

int32_t center(uint32_t v, uint32_t q) {
  const int32_t iv = static_cast<int32_t>(v);
  return iv > static_cast<int32_t>(q / 2) ? iv - static_cast<int32_t>(q) : iv;
}

RingPoly lift(const SignedPoly& s, const RingParams& params) {
  RingPoly out;
  out.c.reserve(s.c.size());
  for (int32_t v : s.c) {
    int64_t m = v % static_cast<int64_t>(params.q);
    if (m < 0) m += params.q;
    out.c.push_back(static_cast<uint32_t>(m));
  }
  return out;
}

// --- Gaussian sampling -------------------------------------------------------

GaussianSampler::GaussianSampler(const RingParams& params)
    : tailcut_(params.tailcut) {
  params.validate();
  const int32_t t = tailcut_;
  std::vector<double> pmf(2 * t + 1);
  double total = 0;
  for (int32_t k = -t; k <= t; ++k) {
    const double p = std::exp(-static_cast<double>(k) * k /
                              (2.0 * params.sigma * params.sigma));
    pmf[k + t] = p;
    total += p;
  }
  cdf_.resize(pmf.size());
  double acc = 0;
  for (size_t i = 0; i < pmf.size(); ++i) {
    acc += pmf[i] / total;
    cdf_[i] = acc;
  }
  cdf_.back() = 1.0;  // guard against rounding
}

int32_t GaussianSampler::sample(SplitMix64& rng) const {
  const double u = rng.next_double();
  // Inversion: first support point whose cumulative mass covers u.
  size_t lo = 0, hi = cdf_.size() - 1;
  while (lo < hi) {
    const size_t mid = (lo + hi) / 2;
    if (cdf_[mid] > u)
      hi = mid;
    else
      lo = mid + 1;
  }
  return static_cast<int32_t>(lo) - tailcut_;
}

SignedPoly GaussianSampler::sample_poly(SplitMix64& rng, uint32_t n) const {
  SignedPoly p;
  p.c.reserve(n);
  for (uint32_t i = 0; i < n; ++i) p.c.push_back(sample(rng));
  return p;
}

double GaussianSampler::table_mean() const {
  double m = 0, prev = 0;
  for (size_t i = 0; i < cdf_.size(); ++i) {
    m += (cdf_[i] - prev) * (static_cast<double>(i) - tailcut_);
    prev = cdf_[i];
  }
  return m;
}

double GaussianSampler::table_variance() const {
  const double mean = table_mean();
  double v = 0, prev = 0;
  for (size_t i = 0; i < cdf_.size(); ++i) {
    const double x = static_cast<double>(i) - tailcut_ - mean;
    v += (cdf_[i] - prev) * x * x;
    prev = cdf_[i];
  }
  return v;
}

SignedPoly sample_gaussian_signed(const RingParams& params, uint64_t seed,
                                  std::string_view stream) {
  GaussianSampler sampler(params);
  SplitMix64 rng = stream_rng(seed, stream);
  return sampler.sample_poly(rng, params.n);
}

RingPoly sample_uniform(const RingParams& params, SplitMix64& rng) {
  RingPoly p;
  p.c.reserve(params.n);
  while (p.c.size() < params.n) {
    // 13-bit rejection keeps the distribution exactly uniform over [0, q).
    uint64_t word = rng.next();
    for (int j = 0; j < 4 && p.c.size() < params.n; ++j) {
      const uint32_t v = static_cast<uint32_t>(word & 0x1fff);
      word >>= 13;
      if (v < params.q) p.c.push_back(v);
    }
  }
  return p;
}

// --- Key generation and the encryption core ---------------------------------

KeyPair keygen(const RingParams& params, uint64_t seed) {
  params.validate();
  KeyPair kp;
  kp.s = sample_gaussian_signed(params, seed, "s");
  const SignedPoly e = sample_gaussian_signed(params, seed, "e");
  SplitMix64 arng = stream_rng(seed, "a");
  kp.pk.a = sample_uniform(params, arng);
  kp.pk.b.c = mulkern::hspm_multiply(kp.pk.a.c, kp.s.c, lift(e, params).c,
                                     params.q).d;
  kp.id = derive_key_id(kp.pk, params);
  return kp;
}

RingPoly encode_message(const Plaintext& m, const RingParams& params) {
  if (m.bits.size() != params.n)
    throw InvalidInput("plaintext must carry exactly n bits");
  RingPoly p;
  p.c.reserve(params.n);
  for (uint8_t bit : m.bits) p.c.push_back(bit ? params.half_q() : 0);
  return p;
}

Plaintext decode_message(const RingPoly& p, const RingParams& params) {
  if (p.c.size() != params.n) throw InvalidInput("polynomial degree mismatch");
  Plaintext m;
  m.bits.reserve(params.n);
  const int32_t half = static_cast<int32_t>(params.half_q());
  const int32_t quarter = static_cast<int32_t>(params.quarter_q());
  for (uint32_t v : p.c) {
    const int32_t d = std::abs(static_cast<int32_t>(v) - half);
    m.bits.push_back(d <= quarter ? 1 : 0);
  }
  return m;
}

Ciphertext encrypt(const Plaintext& m, const PublicKey& pk,
                   const RingParams& params, uint64_t seed) {
  params.validate();
  if (pk.a.c.size() != params.n || pk.b.c.size() != params.n)
    throw InvalidInput("public key degree mismatch");

  const SignedPoly r = sample_gaussian_signed(params, seed, "r");
  const SignedPoly e1 = sample_gaussian_signed(params, seed, "e1");
  const SignedPoly e2 = sample_gaussian_signed(params, seed, "e2");

  Ciphertext ct;
  ct.c1.c = mulkern::hspm_multiply(pk.a.c, r.c, lift(e1, params).c, params.q).d;

  RingPoly e2m = lift(e2, params);
  const RingPoly msg = encode_message(m, params);
  for (uint32_t i = 0; i < params.n; ++i)
    e2m.c[i] = (e2m.c[i] + msg.c[i]) % params.q;
  ct.c2.c = mulkern::hspm_multiply(pk.b.c, r.c, e2m.c, params.q).d;
  return ct;
}

Plaintext decrypt(const Ciphertext& ct, const SignedPoly& s,
                  const RingParams& params) {
  params.validate();
  if (ct.c1.c.size() != params.n || ct.c2.c.size() != params.n)
    throw InvalidInput("ciphertext degree mismatch");
  const std::vector<uint32_t> zero(params.n, 0);
  const auto c1s = mulkern::hspm_multiply(ct.c1.c, s.c, zero, params.q).d;
  RingPoly v;
  v.c.reserve(params.n);
  for (uint32_t i = 0; i < params.n; ++i)
    v.c.push_back((ct.c2.c[i] + params.q - c1s[i]) % params.q);
  return decode_message(v, params);
}

// --- Serialization -----------------------------------------------------------

void pack_poly13(ByteWriter& w, const RingPoly& p) {
  uint32_t acc = 0;
  int bits = 0;
  for (uint32_t v : p.c) {
    acc |= (v & 0x1fff) << bits;
    bits += 13;
    while (bits >= 8) {
      w.u8(static_cast<uint8_t>(acc));
      acc >>= 8;
      bits -= 8;
    }
  }
  if (bits > 0) w.u8(static_cast<uint8_t>(acc));
}

RingPoly unpack_poly13(ByteReader& r, uint32_t n, uint32_t q) {
  RingPoly p;
  p.c.reserve(n);
  uint32_t acc = 0;
  int bits = 0;
  for (uint32_t i = 0; i < n; ++i) {
    while (bits < 13) {
      acc |= static_cast<uint32_t>(r.u8()) << bits;
      bits += 8;
    }
    const uint32_t v = acc & 0x1fff;
    if (v >= q) throw DecodeError("packed coefficient out of range");
    p.c.push_back(v);
    acc >>= 13;
    bits -= 13;
  }
  return p;
}

namespace {

void write_header(ByteWriter& w, const RingParams& params, uint8_t kind) {
  w.magic("SLWE");
  w.u8(kSlweVersion);
  w.u16(static_cast<uint16_t>(params.n));
  w.u16(static_cast<uint16_t>(params.q));
  w.u8(kind);
}

void read_header(ByteReader& r, const RingParams& params, uint8_t kind) {
  r.expect_magic("SLWE");
  if (r.u8() != kSlweVersion) throw DecodeError("unsupported SLWE version");
  if (r.u16() != params.n || r.u16() != params.q)
    throw DecodeError("SLWE parameter mismatch");
  if (r.u8() != kind) throw DecodeError("SLWE kind mismatch");
}

}  // namespace

Bytes serialize_keypair(const KeyPair& kp, const RingParams& params) {
  ByteWriter w;
  write_header(w, params, kKindKeyPair);
  w.bytes(kp.id);
  pack_poly13(w, kp.pk.a);
  pack_poly13(w, kp.pk.b);
  pack_poly13(w, lift(kp.s, params));
  return w.take();
}

KeyPair parse_keypair(std::span<const uint8_t> data, const RingParams& params) {
  ByteReader r(data);
  read_header(r, params, kKindKeyPair);
  KeyPair kp;
  const auto id = r.bytes(kp.id.size());
  std::copy(id.begin(), id.end(), kp.id.begin());
  kp.pk.a = unpack_poly13(r, params.n, params.q);
  kp.pk.b = unpack_poly13(r, params.n, params.q);
  const RingPoly s_lifted = unpack_poly13(r, params.n, params.q);
  kp.s.c.reserve(params.n);
  for (uint32_t v : s_lifted.c) {
    const int32_t sv = center(v, params.q);
    if (std::abs(sv) > params.tailcut)
      throw DecodeError("secret coefficient exceeds tailcut");
    kp.s.c.push_back(sv);
  }
  return kp;
}

Bytes serialize_ciphertext(const Ciphertext& ct, const RingParams& params) {
  ByteWriter w;
  write_header(w, params, kKindCiphertext);
  pack_poly13(w, ct.c1);
  pack_poly13(w, ct.c2);
  return w.take();
}

Ciphertext parse_ciphertext(std::span<const uint8_t> data,
                            const RingParams& params) {
  ByteReader r(data);
  read_header(r, params, kKindCiphertext);
  Ciphertext ct;
  ct.c1 = unpack_poly13(r, params.n, params.q);
  ct.c2 = unpack_poly13(r, params.n, params.q);
  return ct;
}

KeyId derive_key_id(const PublicKey& pk, [[maybe_unused]] const RingParams& params) {
  ByteWriter w;
  pack_poly13(w, pk.a);
  pack_poly13(w, pk.b);
  const Bytes bytes = w.take();
  const uint64_t h1 = fnv1a64(bytes.data(), bytes.size());
  const uint64_t h2 = fnv1a64(bytes.data(), bytes.size(), mix64(h1));
  KeyId id{};
  for (int i = 0; i < 8; ++i) {
    id[i] = static_cast<uint8_t>(h1 >> (8 * i));
    id[8 + i] = static_cast<uint8_t>(h2 >> (8 * i));
  }
  return id;
}

}  // namespace salt::rlwe
