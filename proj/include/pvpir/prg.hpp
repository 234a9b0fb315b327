// Copyright 2026 The PVPIR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PVPIR_PRG_HPP_
#define PVPIR_PRG_HPP_

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "pvpir/rng.hpp"

namespace pvpir::prg {

inline constexpr std::size_t kSeedBytes = 16;
inline constexpr std::size_t kSecurityBits = 8 * kSeedBytes;

using Block = std::array<std::uint8_t, kSeedBytes>;
using Seed = Block;

// Tweaks 0..2 feed the tree expansion; leaf conversion starts at this one.
inline constexpr std::uint32_t kConvertTweakBase = 3;

inline Block xor_blocks(const Block& a, const Block& b) {
  Block out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

inline Block tweaked(const Block& seed, std::uint32_t tweak) {
  Block out = seed;
  out[15] ^= static_cast<std::uint8_t>(tweak);
  out[14] ^= static_cast<std::uint8_t>(tweak >> 8);
  out[13] ^= static_cast<std::uint8_t>(tweak >> 16);
  out[12] ^= static_cast<std::uint8_t>(tweak >> 24);
  return out;
}

// Fixed-key AES-128 in Matyas-Meyer-Oseas mode: H(x) = AES_K(x) ^ x.
class FixedKeyAes {
 public:
  FixedKeyAes() {
    static constexpr std::array<std::uint8_t, 16> kKey = {
        0x70, 0x76, 0x70, 0x69, 0x72, 0x2d, 0x64, 0x70,
        0x66, 0x2d, 0x70, 0x72, 0x67, 0x2d, 0x76, 0x31};
    ctx_ = detail::make_aes128(EVP_aes_128_ecb(), kKey, nullptr);
  }

  void hash(std::span<const Block> in, std::span<Block> out) {
    if (in.empty()) return;
    int len = 0;
    auto* dst = reinterpret_cast<std::uint8_t*>(out.data());
    const auto* src = reinterpret_cast<const std::uint8_t*>(in.data());
    if (EVP_EncryptUpdate(ctx_.get(), dst, &len, src,
                          static_cast<int>(in.size() * kSeedBytes)) != 1) {
      throw Error("fixed-key AES failure");
    }
    const std::size_t words = in.size() * (kSeedBytes / 8);
    for (std::size_t i = 0; i < words; ++i) {
      std::uint64_t a, b;
      std::memcpy(&a, dst + 8 * i, 8);
      std::memcpy(&b, src + 8 * i, 8);
      a ^= b;
      std::memcpy(dst + 8 * i, &a, 8);
    }
  }

 private:
  detail::CipherCtx ctx_;
};

inline FixedKeyAes& fixed_key_aes() {
  thread_local FixedKeyAes aes;
  return aes;
}

struct Expansion {
  Seed left;
  bool left_bit;
  Seed right;
  bool right_bit;

  friend bool operator==(const Expansion&, const Expansion&) = default;
};

// Length-doubling PRG: 2*128 + 2 output bits from one seed.
inline Expansion expand(const Seed& seed) {
  std::array<Block, 3> in = {tweaked(seed, 0), tweaked(seed, 1), tweaked(seed, 2)};
  std::array<Block, 3> out;
  fixed_key_aes().hash(in, out);
  return {out[0], (out[2][15] & 1) != 0, out[1], (out[2][15] & 2) != 0};
}

// Batched form used by full-domain evaluation.
inline void expand_many(std::span<const Seed> seeds, std::vector<Expansion>& out) {
  std::vector<Block> in(3 * seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::uint32_t t = 0; t < 3; ++t) in[3 * i + t] = tweaked(seeds[i], t);
  }
  std::vector<Block> hashed(in.size());
  fixed_key_aes().hash(in, hashed);
  out.resize(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    out[i] = {hashed[3 * i], (hashed[3 * i + 2][15] & 1) != 0, hashed[3 * i + 1],
              (hashed[3 * i + 2][15] & 2) != 0};
  }
}

// `blocks` pseudorandom blocks per seed, laid out seed-major in `out`.
inline void stretch_many(std::span<const Seed> seeds, std::size_t blocks,
                         std::vector<Block>& out) {
  std::vector<Block> in(seeds.size() * blocks);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    for (std::size_t b = 0; b < blocks; ++b) {
      in[i * blocks + b] =
          tweaked(seeds[i], kConvertTweakBase + static_cast<std::uint32_t>(b));
    }
  }
  out.resize(in.size());
  fixed_key_aes().hash(in, out);
}

}  // namespace pvpir::prg

#endif  // PVPIR_PRG_HPP_
