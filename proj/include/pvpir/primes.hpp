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

#ifndef PVPIR_PRIMES_HPP_
#define PVPIR_PRIMES_HPP_

#include <openssl/sha.h>

#include <array>
#include <cstdint>
#include <vector>

#include "pvpir/bigint.hpp"
#include "pvpir/errors.hpp"
#include "pvpir/rng.hpp"

namespace pvpir {

inline constexpr int kMillerRabinRounds = 64;

namespace detail {

inline const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> primes = [] {
    constexpr std::uint32_t kLimit = 1 << 15;
    std::vector<bool> composite(kLimit, false);
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 2; i < kLimit; ++i) {
      if (composite[i]) continue;
      out.push_back(i);
      for (std::uint64_t j = std::uint64_t{i} * i; j < kLimit; j += i) composite[j] = true;
    }
    return out;
  }();
  return primes;
}

// Bases for Miller-Rabin come from a stream keyed on the candidate, so the
// test is a pure function of its input.
inline Rng witness_stream(const BigInt& n) {
  Bytes mag = magnitude_bytes(n);
  std::uint8_t digest[SHA256_DIGEST_LENGTH];
  SHA256(mag.data(), mag.size(), digest);
  Rng::Key key;
  std::copy_n(digest, key.size(), key.begin());
  return Rng(key);
}

}  // namespace detail

inline bool miller_rabin(const BigInt& n, int rounds = kMillerRabinRounds) {
  if (n < 2) return false;
  for (std::uint32_t p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
  }
  BigInt n_minus_1 = n - 1;
  BigInt odd = n_minus_1;
  unsigned long twos = mpz_scan1(odd.get_mpz_t(), 0);
  mpz_fdiv_q_2exp(odd.get_mpz_t(), odd.get_mpz_t(), twos);

  Rng bases = detail::witness_stream(n);
  BigInt x;
  BigInt base_range = n - 3;  // bases in [2, n-2]
  for (int round = 0; round < rounds; ++round) {
    BigInt a = 2 + bases.below(base_range);
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), odd.get_mpz_t(), n.get_mpz_t());
    if (x == 1 || x == n_minus_1) continue;
    bool witness = true;
    for (unsigned long r = 1; r < twos; ++r) {
      x = x * x % n;
      if (x == n_minus_1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

struct SafePrime {
  BigInt p;  // 2q + 1
  BigInt q;
};

struct SafePrimeOptions {
  // Forces the two leading bits of p, so products of two such primes have
  // exactly twice the bit length.
  bool top_two_bits = false;
  std::size_t max_attempts = 0;  // 0 selects a size-dependent default
};

// Random safe prime of exactly `bits` bits. Candidates for q are walked in
// steps of 2 from a random start while a residue sieve over small primes
// discards any q or 2q+1 with a small factor; survivors go through a base-2
// Fermat filter and then full Miller-Rabin on both q and p.
inline SafePrime generate_safe_prime(std::size_t bits, Rng& rng,
                                     SafePrimeOptions options = {}) {
  if (bits < 3) throw InvalidArgument("safe primes need at least 3 bits");
  const std::size_t qbits = bits - 1;
  const bool sieve = bits >= 64;
  const std::size_t window = sieve ? 16 * bits : 1;
  std::size_t attempts =
      options.max_attempts ? options.max_attempts : (sieve ? 64 * bits : 200000);
  const auto& primes = detail::small_primes();
  const std::size_t sieve_count = sieve ? std::min<std::size_t>(primes.size(), 2 * bits) : 0;

  BigInt p;
  BigInt two_to_qbits = BigInt(1) << static_cast<mp_bitcnt_t>(qbits);
  BigInt fermat;
  BigInt two(2);
  std::vector<std::uint32_t> residues(sieve_count);

  for (std::size_t attempt = 0; attempt < attempts; ++attempt) {
    BigInt start = rng.bits(qbits);
    mpz_setbit(start.get_mpz_t(), qbits - 1);
    if (options.top_two_bits && qbits >= 2) mpz_setbit(start.get_mpz_t(), qbits - 2);
    mpz_setbit(start.get_mpz_t(), 0);

    for (std::size_t i = 0; i < sieve_count; ++i) {
      residues[i] = static_cast<std::uint32_t>(mpz_fdiv_ui(start.get_mpz_t(), primes[i]));
    }
    for (std::size_t step = 0; step < window; ++step) {
      const std::uint64_t delta = 2 * step;
      bool rejected = false;
      for (std::size_t i = 1; i < sieve_count && !rejected; ++i) {
        const std::uint32_t r = primes[i];
        const std::uint64_t qr = (residues[i] + delta) % r;
        rejected = qr == 0 || qr == (r - 1) / 2;
      }
      if (rejected) continue;
      BigInt q = start + delta;
      if (q >= two_to_qbits) break;
      p = 2 * q + 1;
      if (sieve) {
        mpz_powm(fermat.get_mpz_t(), two.get_mpz_t(), q.get_mpz_t(), q.get_mpz_t());
        if (fermat != 2) continue;
        BigInt p_minus_1 = p - 1;
        mpz_powm(fermat.get_mpz_t(), two.get_mpz_t(), p_minus_1.get_mpz_t(), p.get_mpz_t());
        if (fermat != 1) continue;
      }
      if (miller_rabin(q) && miller_rabin(p)) return {p, q};
    }
  }
  throw GenerationError("no safe prime found within the retry bound");
}

inline bool is_safe_prime(const BigInt& p) {
  if (p < 5 || mpz_even_p(p.get_mpz_t())) return false;
  return miller_rabin((p - 1) / 2) && miller_rabin(p);
}

}  // namespace pvpir

#endif  // PVPIR_PRIMES_HPP_
