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

#ifndef PVPIR_FIELD_GROUP_HPP_
#define PVPIR_FIELD_GROUP_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "pvpir/bigint.hpp"
#include "pvpir/errors.hpp"
#include "pvpir/primes.hpp"
#include "pvpir/rng.hpp"

namespace pvpir {

// An exponent: either reduced into Z_q of a prime-order group, or a plain
// signed integer (RSA exponents cannot be reduced mod the secret totient).
class ExponentScalar {
 public:
  enum class Domain : std::uint8_t { kModGroupOrder, kInteger };

  static ExponentScalar mod(BigInt value, const BigInt& order) {
    if (order <= 1) throw InvalidArgument("group order must exceed 1");
    BigInt reduced;
    mpz_mod(reduced.get_mpz_t(), value.get_mpz_t(), order.get_mpz_t());
    return ExponentScalar(std::move(reduced), Domain::kModGroupOrder);
  }
  static ExponentScalar integer(BigInt value) {
    return ExponentScalar(std::move(value), Domain::kInteger);
  }

  const BigInt& value() const { return value_; }
  Domain domain() const { return domain_; }

  friend bool operator==(const ExponentScalar& a, const ExponentScalar& b) {
    return a.domain_ == b.domain_ && a.value_ == b.value_;
  }

 private:
  ExponentScalar(BigInt value, Domain domain)
      : value_(std::move(value)), domain_(domain) {}

  BigInt value_;
  Domain domain_;
};

// base^exp mod modulus in [0, modulus). Negative exponents go through the
// modular inverse of the base.
inline BigInt pow_mod(const BigInt& base, const BigInt& exp, const BigInt& modulus) {
  if (modulus <= 1) throw InvalidArgument("modulus must exceed 1");
  BigInt b;
  mpz_mod(b.get_mpz_t(), base.get_mpz_t(), modulus.get_mpz_t());
  if (exp < 0) {
    BigInt inv;
    if (mpz_invert(inv.get_mpz_t(), b.get_mpz_t(), modulus.get_mpz_t()) == 0) {
      throw InvalidArgument("negative exponent of a non-invertible base");
    }
    b = inv;
  }
  BigInt e = abs(exp);
  BigInt out;
  mpz_powm(out.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), modulus.get_mpz_t());
  return out;
}

inline BigInt pow_mod(const BigInt& base, const ExponentScalar& exp,
                      const BigInt& modulus) {
  return pow_mod(base, exp.value(), modulus);
}

inline BigInt mod_inverse(const BigInt& a, const BigInt& modulus) {
  BigInt inv;
  if (mpz_invert(inv.get_mpz_t(), a.get_mpz_t(), modulus.get_mpz_t()) == 0) {
    throw InvalidArgument("element is not invertible");
  }
  return inv;
}

inline BigInt gcd(const BigInt& a, const BigInt& b) {
  BigInt out;
  mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

// Precomputed powers base^(j * 2^(w*i)) so that base^e costs about
// bits(e)/w modular multiplications and no squarings.
class FixedBasePow {
 public:
  FixedBasePow(const BigInt& base, const BigInt& modulus, std::size_t max_exp_bits,
               std::size_t window = 5)
      : modulus_(modulus), window_(window) {
    if (modulus <= 1) throw InvalidArgument("modulus must exceed 1");
    BigInt b;
    mpz_mod(b.get_mpz_t(), base.get_mpz_t(), modulus.get_mpz_t());
    base_ = b;
    const std::size_t rows = (max_exp_bits + window - 1) / window;
    const std::size_t cols = std::size_t{1} << window;
    table_.resize(rows * cols);
    BigInt row_base = b;
    for (std::size_t i = 0; i < rows; ++i) {
      BigInt acc = 1;
      for (std::size_t j = 0; j < cols; ++j) {
        table_[i * cols + j] = acc;
        acc = acc * row_base % modulus_;
      }
      row_base = acc;  // row_base^(2^w)
    }
    max_bits_ = rows * window;
  }

  BigInt operator()(const BigInt& exp) const {
    if (exp < 0) return mod_inv(operator()(BigInt(-exp)));
    if (bit_length(exp) > max_bits_) return plain(exp);
    const std::size_t cols = std::size_t{1} << window_;
    BigInt acc = 1;
    const std::size_t bits = bit_length(exp);
    for (std::size_t i = 0; i * window_ < bits; ++i) {
      std::size_t digit = 0;
      for (std::size_t b = 0; b < window_; ++b) {
        if (mpz_tstbit(exp.get_mpz_t(), i * window_ + b)) digit |= std::size_t{1} << b;
      }
      if (digit == 0) continue;
      mpz_mul(acc.get_mpz_t(), acc.get_mpz_t(), table_[i * cols + digit].get_mpz_t());
      mpz_tdiv_r(acc.get_mpz_t(), acc.get_mpz_t(), modulus_.get_mpz_t());
    }
    return acc;
  }

 private:
  BigInt plain(const BigInt& exp) const {
    BigInt out;
    mpz_powm(out.get_mpz_t(), base_.get_mpz_t(), exp.get_mpz_t(), modulus_.get_mpz_t());
    return out;
  }
  BigInt mod_inv(const BigInt& x) const {
    BigInt inv;
    if (mpz_invert(inv.get_mpz_t(), x.get_mpz_t(), modulus_.get_mpz_t()) == 0) {
      throw InvalidArgument("negative exponent of a non-invertible base");
    }
    return inv;
  }

  BigInt base_;
  BigInt modulus_;
  std::size_t window_;
  std::size_t max_bits_ = 0;
  std::vector<BigInt> table_;
};

// Order-q subgroup of Z_p^* for a safe prime p = 2q + 1.
struct DlGroup {
  BigInt p;
  BigInt q;
  BigInt xi;

  // Throws InvalidArgument describing the first violated invariant.
  void validate() const {
    if (p != 2 * q + 1) throw InvalidArgument("p != 2q + 1");
    if (!miller_rabin(q) || !miller_rabin(p)) throw InvalidArgument("p or q not prime");
    if (xi <= 1 || xi >= p - 1) throw InvalidArgument("generator out of range");
    if (pow_mod(xi, q, p) != 1) throw InvalidArgument("generator order is not q");
  }

  bool contains(const BigInt& element) const {
    return element > 0 && element < p && pow_mod(element, q, p) == 1;
  }

  void encode(ByteWriter& w) const {
    w.bigint(p);
    w.bigint(q);
    w.bigint(xi);
  }
  static DlGroup decode(ByteReader& r) {
    DlGroup g;
    g.p = r.bigint();
    g.q = r.bigint();
    g.xi = r.bigint();
    if (g.p <= 3 || g.q <= 1 || g.xi <= 1 || g.xi >= g.p) {
      throw DecodeError("group parameters out of range");
    }
    return g;
  }

  friend bool operator==(const DlGroup&, const DlGroup&) = default;
};

inline DlGroup gen_dl_group(std::size_t bits, Rng& rng) {
  SafePrime sp = generate_safe_prime(bits, rng);
  const BigInt p_minus_1 = sp.p - 1;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    BigInt h = rng.between(2, sp.p - 2);
    BigInt xi = h * h % sp.p;
    if (xi != 1 && xi != p_minus_1) return {sp.p, sp.q, xi};
  }
  throw GenerationError("no subgroup generator found");
}

inline ExponentScalar sample_scalar_nonzero(const DlGroup& group, Rng& rng) {
  return ExponentScalar::mod(1 + rng.below(group.q - 1), group.q);
}

// The 3072-bit safe prime of the RFC 3526 MODP group 15; 4 = 2^2 lies in
// its prime-order subgroup.
inline DlGroup standard_group_3072() {
  static constexpr std::string_view kPrimeHex =
      "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
      "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
      "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
      "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
      "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
      "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
      "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
      "3995497CEA956AE515D2261898FA051015728E5A8AAAC42DAD33170D04507A33"
      "A85521ABDF1CBA64ECFB850458DBEF0A8AEA71575D060C7DB3970F85A6E1E4C7"
      "ABF5AE8CDB0933D71E8C94E04A25619DCEE3D2261AD2EE6BF12FFA06D98A0864"
      "D87602733EC86A64521F2B18177B200CBBE117577A615D6C770988C0BAD946E2"
      "08E24FA074E5AB3143DB5BFCE0FD108E4B82D120A93AD2CAFFFFFFFFFFFFFFFF";
  DlGroup g;
  g.p = BigInt(std::string(kPrimeHex), 16);
  g.q = (g.p - 1) / 2;
  g.xi = 4;
  return g;
}

struct RsaPublicKey {
  BigInt xi;
  BigInt n;
  BigInt e;

  void encode(ByteWriter& w) const {
    w.bigint(xi);
    w.bigint(n);
    w.bigint(e);
  }
  static RsaPublicKey decode(ByteReader& r) {
    RsaPublicKey k;
    k.xi = r.bigint();
    k.n = r.bigint();
    k.e = r.bigint();
    if (k.n <= 2 || k.e <= 0 || k.xi <= 0 || k.xi >= k.n) {
      throw DecodeError("RSA public key out of range");
    }
    return k;
  }

  friend bool operator==(const RsaPublicKey&, const RsaPublicKey&) = default;
};

struct RsaKeyPair {
  BigInt n;
  BigInt e;
  BigInt d;
  BigInt phi;
  BigInt xi;
  BigInt p;
  BigInt q;

  RsaPublicKey public_key() const { return {xi, n, e}; }

  // Builds a key pair from chosen factors and secret exponent.
  static RsaKeyPair from_parts(const BigInt& p, const BigInt& q, const BigInt& d,
                               const BigInt& xi) {
    RsaKeyPair k;
    k.p = p;
    k.q = q;
    k.n = p * q;
    k.phi = (p - 1) * (q - 1);
    k.d = d;
    k.e = mod_inverse(d, k.phi);
    k.xi = xi;
    k.validate();
    return k;
  }

  void validate() const {
    if (n != p * q || p == q) throw InvalidArgument("n is not a product of distinct primes");
    if (!is_safe_prime(p) || !is_safe_prime(q)) throw InvalidArgument("factors are not safe primes");
    if (phi != (p - 1) * (q - 1)) throw InvalidArgument("totient mismatch");
    if (BigInt(d * e % phi) != 1) throw InvalidArgument("d * e != 1 mod phi");
    if (xi <= 0 || xi >= n || gcd(xi, n) != 1) throw InvalidArgument("xi is not a unit");
  }
};

inline RsaKeyPair gen_rsa_keypair(std::size_t bits, Rng& rng) {
  if (bits < 12) throw InvalidArgument("RSA modulus needs at least 12 bits");
  const std::size_t half = bits / 2;
  SafePrimeOptions options;
  options.top_two_bits = bits >= 64;
  for (int attempt = 0; attempt < 256; ++attempt) {
    SafePrime a = generate_safe_prime(half, rng, options);
    SafePrime b = generate_safe_prime(bits - half, rng, options);
    if (a.p == b.p) continue;
    RsaKeyPair k;
    k.p = a.p;
    k.q = b.p;
    k.n = k.p * k.q;
    if (bit_length(k.n) != bits) continue;
    k.phi = (k.p - 1) * (k.q - 1);
    do {
      k.d = rng.between(2, k.n - 1);
    } while (gcd(k.d, k.phi) != 1 || gcd(k.d, k.n) != 1);
    k.e = mod_inverse(k.d, k.phi);
    do {
      k.xi = rng.between(2, k.n - 1);
    } while (gcd(k.xi, k.n) != 1);
    return k;
  }
  throw GenerationError("no RSA modulus of the requested size found");
}

}  // namespace pvpir

#endif  // PVPIR_FIELD_GROUP_HPP_
