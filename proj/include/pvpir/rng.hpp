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

#ifndef PVPIR_RNG_HPP_
#define PVPIR_RNG_HPP_

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <limits>
#include <memory>
#include <span>

#include "pvpir/bigint.hpp"
#include "pvpir/errors.hpp"

namespace pvpir {

namespace detail {

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

inline CipherCtx make_aes128(const EVP_CIPHER* cipher,
                             std::span<const std::uint8_t, 16> key,
                             const std::uint8_t* iv) {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), cipher, nullptr, key.data(), iv) != 1) {
    throw Error("AES context initialisation failed");
  }
  EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
  return ctx;
}

}  // namespace detail

// Deterministic AES-128-CTR generator. Every randomized operation in the
// library takes one of these explicitly so experiments replay from a seed.
class Rng {
 public:
  using result_type = std::uint64_t;
  using Key = std::array<std::uint8_t, 16>;

  explicit Rng(const Key& key) : key_(key) {
    std::array<std::uint8_t, 16> iv{};
    ctx_ = detail::make_aes128(EVP_aes_128_ctr(), key_, iv.data());
  }

  static Rng from_seed(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint8_t material[24] = {'p', 'v', 'p', 'i', 'r', '-', 's', 'd'};
    for (int i = 0; i < 8; ++i) {
      material[8 + i] = static_cast<std::uint8_t>(seed >> (8 * i));
      material[16 + i] = static_cast<std::uint8_t>(stream >> (8 * i));
    }
    return Rng(hash_key(material));
  }

  static Rng from_os() {
    Key key;
    if (RAND_bytes(key.data(), static_cast<int>(key.size())) != 1) {
      throw Error("operating system entropy unavailable");
    }
    return Rng(key);
  }

  Rng(Rng&&) noexcept = default;
  Rng& operator=(Rng&&) noexcept = default;

  // Independent child stream; children of the same parent and index agree.
  Rng derive(std::uint64_t index) const {
    std::uint8_t material[24];
    std::memcpy(material, key_.data(), key_.size());
    for (int i = 0; i < 8; ++i) {
      material[16 + i] = static_cast<std::uint8_t>(index >> (8 * i));
    }
    return Rng(hash_key(material));
  }

  void fill(std::span<std::uint8_t> out) {
    while (!out.empty()) {
      if (pos_ == buffer_.size()) refill();
      std::size_t n = std::min(out.size(), buffer_.size() - pos_);
      std::memcpy(out.data(), buffer_.data() + pos_, n);
      pos_ += n;
      out = out.subspan(n);
    }
  }

  std::uint64_t next_u64() {
    std::uint8_t b[8];
    fill(b);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | b[i];
    return v;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return next_u64(); }

  // Uniform in [0, bound) by rejection.
  std::uint64_t uniform(std::uint64_t bound) {
    if (bound == 0) throw InvalidArgument("empty sampling range");
    std::uint64_t limit = max() - max() % bound;
    for (;;) {
      std::uint64_t v = next_u64();
      if (v < limit) return v % bound;
    }
  }

  // Uniform in [0, 2^bits).
  BigInt bits(std::size_t bits) {
    Bytes raw((bits + 7) / 8);
    fill(raw);
    if (bits % 8 != 0) raw[0] &= static_cast<std::uint8_t>((1u << (bits % 8)) - 1);
    return from_bytes_be(raw);
  }

  // Uniform in [0, bound) by rejection on bit_length(bound) bits.
  BigInt below(const BigInt& bound) {
    if (bound <= 0) throw InvalidArgument("empty sampling range");
    std::size_t nbits = bit_length(bound);
    for (;;) {
      BigInt v = bits(nbits);
      if (v < bound) return v;
    }
  }

  // Uniform in [lo, hi].
  BigInt between(const BigInt& lo, const BigInt& hi) {
    BigInt span = hi - lo + 1;
    return lo + below(span);
  }

 private:
  static Key hash_key(std::span<const std::uint8_t> material) {
    std::uint8_t digest[SHA256_DIGEST_LENGTH];
    SHA256(material.data(), material.size(), digest);
    Key key;
    std::memcpy(key.data(), digest, key.size());
    return key;
  }

  void refill() {
    static const std::array<std::uint8_t, 4096> kZeros{};
    int len = 0;
    if (EVP_EncryptUpdate(ctx_.get(), buffer_.data(), &len, kZeros.data(),
                          static_cast<int>(kZeros.size())) != 1) {
      throw Error("AES-CTR keystream failure");
    }
    pos_ = 0;
  }

  Key key_;
  detail::CipherCtx ctx_;
  std::array<std::uint8_t, 4096> buffer_{};
  std::size_t pos_ = buffer_.size();
};

}  // namespace pvpir

#endif  // PVPIR_RNG_HPP_
