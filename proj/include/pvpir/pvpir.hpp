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

#ifndef PVPIR_PVPIR_HPP_
#define PVPIR_PVPIR_HPP_

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pvpir/bigint.hpp"
#include "pvpir/database.hpp"
#include "pvpir/errors.hpp"
#include "pvpir/field_group.hpp"
#include "pvpir/fss.hpp"
#include "pvpir/rng.hpp"

namespace pvpir {

// Wire tags: plain = 0, then the three verifiable schemes.
enum class SchemeId : std::uint8_t {
  kPlainFssPir = 0,
  kDlPredicate = 1,
  kRsaPredicate = 2,
  kDlPoint = 3,
};

inline std::string_view scheme_name(SchemeId s) {
  switch (s) {
    case SchemeId::kPlainFssPir: return "plain";
    case SchemeId::kDlPredicate: return "pi1";
    case SchemeId::kRsaPredicate: return "pi2";
    case SchemeId::kDlPoint: return "pi3";
  }
  return "unknown";
}

inline std::optional<SchemeId> parse_scheme(std::string_view name) {
  for (auto s : {SchemeId::kPlainFssPir, SchemeId::kDlPredicate, SchemeId::kRsaPredicate,
                 SchemeId::kDlPoint}) {
    if (scheme_name(s) == name) return s;
  }
  return std::nullopt;
}

inline SchemeId scheme_from_tag(std::uint8_t tag) {
  if (tag > 3) throw DecodeError("unknown scheme tag");
  return static_cast<SchemeId>(tag);
}

inline bool is_verifiable(SchemeId s) { return s != SchemeId::kPlainFssPir; }
inline bool uses_rsa(SchemeId s) { return s == SchemeId::kRsaPredicate; }

enum class Profile { kToy, kPaper };

inline constexpr std::size_t kToyModulusBits = 16;
inline constexpr std::size_t kPaperModulusBits = 3072;

inline std::optional<Profile> parse_profile(std::string_view name) {
  if (name == "toy") return Profile::kToy;
  if (name == "paper") return Profile::kPaper;
  return std::nullopt;
}

// pk: a prime-order group (DL schemes) or (xi, n, e) (RSA scheme).
class PublicKey {
 public:
  static PublicKey dl(DlGroup group) { return PublicKey(std::move(group)); }
  static PublicKey rsa(RsaPublicKey key) { return PublicKey(std::move(key)); }

  bool is_rsa() const { return std::holds_alternative<RsaPublicKey>(params_); }
  const DlGroup& group() const { return std::get<DlGroup>(params_); }
  const RsaPublicKey& rsa() const { return std::get<RsaPublicKey>(params_); }

  const BigInt& modulus() const { return is_rsa() ? rsa().n : group().p; }
  const BigInt& xi() const { return is_rsa() ? rsa().xi : group().xi; }

  // Output group of payload shares and of verification shares.
  const fss::OutputGroup& share_group() const { return share_group_; }
  // Z_n for RSA verification aggregates; Z_q otherwise.
  const fss::OutputGroup& unit_group() const { return unit_group_; }

  // Largest lane width whose values stay below the payload modulus.
  std::size_t max_lane_bits() const {
    if (is_rsa()) return kDefaultLaneBits;
    return std::min<std::size_t>(kDefaultLaneBits, bit_length(group().q) - 1);
  }

  // xi^exp mod modulus, through a shared fixed-base table for large moduli.
  BigInt pow_xi(const BigInt& exp) const {
    if (bit_length(modulus()) < 512) return pow_mod(xi(), exp, modulus());
    std::call_once(table_->once, [&] {
      const std::size_t exp_bits = bit_length(modulus()) + fss::kDefaultSecurityBits + 96;
      table_->pow.emplace(xi(), modulus(), exp_bits);
    });
    return (*table_->pow)(exp);
  }

  void encode(ByteWriter& w) const {
    if (is_rsa()) {
      w.u8(2);
      rsa().encode(w);
    } else {
      w.u8(1);
      group().encode(w);
    }
  }
  static PublicKey decode(ByteReader& r) {
    const std::uint8_t family = r.u8();
    if (family == 1) return dl(DlGroup::decode(r));
    if (family == 2) return rsa(RsaPublicKey::decode(r));
    throw DecodeError("unknown public key family");
  }

  friend bool operator==(const PublicKey& a, const PublicKey& b) { return a.params_ == b.params_; }

 private:
  struct Table {
    std::once_flag once;
    std::optional<FixedBasePow> pow;
  };

  explicit PublicKey(std::variant<DlGroup, RsaPublicKey> params)
      : params_(std::move(params)), table_(std::make_shared<Table>()) {
    if (is_rsa()) {
      share_group_ = fss::OutputGroup::integers(bit_length(rsa().n));
      unit_group_ = fss::OutputGroup::mod(rsa().n);
    } else {
      share_group_ = fss::OutputGroup::mod(group().q);
      unit_group_ = share_group_;
    }
  }

  std::variant<DlGroup, RsaPublicKey> params_;
  std::shared_ptr<Table> table_;
  fss::OutputGroup share_group_;
  fss::OutputGroup unit_group_;
};

struct SchemeKeys {
  SchemeId scheme;
  PublicKey pk;
  std::optional<BigInt> sk;  // RSA secret exponent d; absent for DL schemes

  // Same public key, unverified mode.
  SchemeKeys as_plain() const { return {SchemeId::kPlainFssPir, pk, std::nullopt}; }
};

inline SchemeKeys keys_from_group(SchemeId scheme, DlGroup group) {
  if (uses_rsa(scheme)) throw InvalidArgument("RSA scheme needs an RSA key pair");
  return {scheme, PublicKey::dl(std::move(group)), std::nullopt};
}

inline SchemeKeys keys_from_rsa(const RsaKeyPair& pair) {
  return {SchemeId::kRsaPredicate, PublicKey::rsa(pair.public_key()), pair.d};
}

inline SchemeKeys keygen_bits(SchemeId scheme, std::size_t bits, Rng& rng) {
  if (uses_rsa(scheme)) return keys_from_rsa(gen_rsa_keypair(bits, rng));
  return keys_from_group(scheme, gen_dl_group(bits, rng));
}

// Toy profile: 16-bit moduli. Paper profile: the 3072-bit MODP group for
// the DL schemes and a fresh 3072-bit modulus for RSA.
inline SchemeKeys keygen(SchemeId scheme, Profile profile, Rng& rng) {
  if (profile == Profile::kToy) return keygen_bits(scheme, kToyModulusBits, rng);
  if (uses_rsa(scheme)) return keygen_bits(scheme, kPaperModulusBits, rng);
  return keys_from_group(scheme, standard_group_3072());
}

// vk: xi^alpha for the DL schemes, e for RSA.
struct VerificationKey {
  SchemeId scheme;
  BigInt value;

  friend bool operator==(const VerificationKey&, const VerificationKey&) = default;
};

struct QueryShare {
  SchemeId scheme;
  fss::FssKey payload;
  std::optional<fss::FssKey> verify;

  std::uint8_t party() const { return payload.party; }
};

struct AnswerPair {
  SchemeId scheme;
  std::vector<BigInt> a;        // one payload aggregate per lane
  std::vector<BigInt> a_prime;  // one verification aggregate per lane

  friend bool operator==(const AnswerPair&, const AnswerPair&) = default;
};

struct QueryBundle {
  std::vector<QueryShare> shares;
  std::optional<VerificationKey> vk;
  BigInt alpha;  // client-side secret of the DL schemes, zero otherwise
};

struct QueryOptions {
  std::optional<fss::Variant> variant;  // unset: DPF for two-party point functions
  std::size_t security_bits = fss::kDefaultSecurityBits;
  std::optional<BigInt> alpha;  // DL schemes: replay a recorded alpha instead of sampling
};

inline QueryBundle query(const SchemeKeys& keys, const fss::FunctionDescription& f,
                         std::size_t k, Rng& rng, const QueryOptions& options = {}) {
  if (!(f.group() == keys.pk.share_group())) {
    throw InvalidArgument("function output group does not match the scheme");
  }
  if (keys.scheme == SchemeId::kDlPoint && !f.is_point()) {
    throw InvalidArgument("point-query scheme needs a point function");
  }
  fss::Variant variant = options.variant.value_or(
      f.is_point() && k == 2 && f.group().is_modular() ? fss::Variant::kDpf
                                                       : fss::Variant::kVector);
  QueryBundle out;
  std::optional<fss::FunctionDescription> g;
  switch (keys.scheme) {
    case SchemeId::kPlainFssPir:
      break;
    case SchemeId::kDlPredicate:
    case SchemeId::kDlPoint: {
      if (keys.pk.is_rsa()) throw InvalidArgument("DL scheme with an RSA key");
      const BigInt& order = keys.pk.group().q;
      if (options.alpha && (*options.alpha <= 0 || *options.alpha >= order)) {
        throw InvalidArgument("alpha must lie in [1, q - 1]");
      }
      ExponentScalar alpha = options.alpha ? ExponentScalar::mod(*options.alpha, order)
                                           : sample_scalar_nonzero(keys.pk.group(), rng);
      out.alpha = alpha.value();
      out.vk = VerificationKey{keys.scheme, keys.pk.pow_xi(alpha.value())};
      g = fss::scalar_mul_function(alpha, f);
      break;
    }
    case SchemeId::kRsaPredicate: {
      if (!keys.pk.is_rsa() || !keys.sk) throw InvalidArgument("RSA scheme needs (pk, d)");
      out.vk = VerificationKey{keys.scheme, keys.pk.rsa().e};
      g = fss::scalar_mul_function(*keys.sk, f);
      break;
    }
  }
  auto payload = fss::fss_gen(options.security_bits, f, k, rng, variant);
  std::vector<fss::FssKey> verify;
  if (g) verify = fss::fss_gen(options.security_bits, *g, k, rng, variant);
  for (std::size_t j = 0; j < k; ++j) {
    QueryShare share{keys.scheme, std::move(payload[j]), std::nullopt};
    if (g) share.verify = std::move(verify[j]);
    out.shares.push_back(std::move(share));
  }
  return out;
}

namespace detail {

inline void check_share_bound(const fss::FssKey& key, std::size_t security_bits) {
  const auto* v = std::get_if<fss::VectorKey>(&key.body);
  if (v == nullptr) return;
  const std::size_t bound = key.group.share_bound_bits(security_bits);
  for (const auto& x : v->values) {
    if (bit_length(x) > bound) throw InvalidArgument("integer share exceeds the masking bound");
  }
}

}  // namespace detail

// One server's reply. Pure in (pk, db, share).
inline AnswerPair answer(const PublicKey& pk, const DatabaseView& db, const QueryShare& share) {
  const auto& weights = db.weights();
  if (share.payload.domain_size != db.size()) {
    throw InvalidArgument("query domain does not match the database");
  }
  if (is_verifiable(share.scheme)) {
    if (!share.verify) throw InvalidArgument("verifiable query without a verification share");
    if (share.verify->domain_size != db.size() || share.verify->party != share.payload.party) {
      throw InvalidArgument("payload and verification shares disagree");
    }
    if (uses_rsa(share.scheme) != pk.is_rsa()) throw InvalidArgument("scheme does not match pk");
  }
  AnswerPair out{share.scheme, {}, {}};
  if (!share.payload.group.is_modular()) {
    detail::check_share_bound(share.payload, fss::kDefaultSecurityBits);
  }
  out.a = fss::fss_inner_product(share.payload, weights.values, weights.lanes);
  if (!is_verifiable(share.scheme)) return out;

  if (uses_rsa(share.scheme)) {
    detail::check_share_bound(*share.verify, fss::kDefaultSecurityBits);
    auto exponents = fss::fss_inner_product(*share.verify, weights.values, weights.lanes);
    out.a_prime.reserve(exponents.size());
    for (const auto& e : exponents) out.a_prime.push_back(pk.pow_xi(e));
  } else {
    out.a_prime = fss::fss_inner_product(*share.verify, weights.values, weights.lanes);
  }
  return out;
}

// Reconstruction result: the per-lane values, or REJECT.
class Outcome {
 public:
  static Outcome accept(std::vector<BigInt> values) { return Outcome(true, std::move(values)); }
  static Outcome reject() { return Outcome(false, {}); }

  bool accepted() const { return accepted_; }
  const std::vector<BigInt>& values() const { return values_; }
  const BigInt& value() const { return values_.at(0); }

 private:
  Outcome(bool accepted, std::vector<BigInt> values)
      : accepted_(accepted), values_(std::move(values)) {}

  bool accepted_;
  std::vector<BigInt> values_;
};

struct Aggregate {
  std::vector<BigInt> m;
  std::vector<BigInt> tau;
  bool well_formed = true;  // false when an RSA tag is not a unit mod n
};

// (m, tau) per lane: sums for the DL schemes, (sum, product mod n) for RSA.
inline Aggregate aggregate(std::span<const AnswerPair> answers, const PublicKey& pk) {
  if (answers.empty()) throw InvalidArgument("no answers to reconstruct");
  const SchemeId scheme = answers.front().scheme;
  const std::size_t lanes = answers.front().a.size();
  for (const auto& ans : answers) {
    if (ans.scheme != scheme) throw InvalidArgument("answers from different schemes");
    if (ans.a.size() != lanes || lanes == 0) throw InvalidArgument("answers with different lane counts");
    if (is_verifiable(scheme) && ans.a_prime.size() != lanes) {
      throw InvalidArgument("verification aggregate missing");
    }
  }
  if (is_verifiable(scheme) && uses_rsa(scheme) != pk.is_rsa()) {
    throw InvalidArgument("scheme does not match pk");
  }
  Aggregate agg;
  agg.m.assign(lanes, 0);
  for (const auto& ans : answers) {
    for (std::size_t l = 0; l < lanes; ++l) agg.m[l] += ans.a[l];
  }
  for (auto& m : agg.m) m = pk.share_group().reduce(m);
  if (!is_verifiable(scheme)) return agg;

  if (uses_rsa(scheme)) {
    const BigInt& n = pk.rsa().n;
    agg.tau.assign(lanes, 1);
    for (const auto& ans : answers) {
      for (std::size_t l = 0; l < lanes; ++l) {
        const BigInt& t = ans.a_prime[l];
        if (t <= 0 || t >= n || gcd(t, n) != 1) agg.well_formed = false;
        agg.tau[l] = agg.tau[l] * t % n;
      }
    }
  } else {
    agg.tau.assign(lanes, 0);
    for (const auto& ans : answers) {
      for (std::size_t l = 0; l < lanes; ++l) agg.tau[l] += ans.a_prime[l];
    }
    for (auto& t : agg.tau) t = pk.share_group().reduce(t);
  }
  return agg;
}

// The public check: vk^m == xi^tau (mod p), or xi^m == tau^e (mod n).
// Needs nothing but (answers, pk, vk).
inline bool verify(std::span<const AnswerPair> answers, const PublicKey& pk,
                   const VerificationKey& vk) {
  if (answers.empty()) throw InvalidArgument("no answers to verify");
  if (!is_verifiable(answers.front().scheme)) throw InvalidArgument("scheme not verifiable");
  if (vk.scheme != answers.front().scheme) throw InvalidArgument("vk belongs to another scheme");
  Aggregate agg = aggregate(answers, pk);
  if (!agg.well_formed) return false;
  if (pk.is_rsa()) {
    const BigInt& n = pk.rsa().n;
    for (std::size_t l = 0; l < agg.m.size(); ++l) {
      if (pk.pow_xi(agg.m[l]) != pow_mod(agg.tau[l], vk.value, n)) return false;
    }
    return true;
  }
  const DlGroup& g = pk.group();
  if (!g.contains(vk.value)) throw InvalidArgument("vk outside the prime-order subgroup");
  for (std::size_t l = 0; l < agg.m.size(); ++l) {
    if (pow_mod(vk.value, agg.m[l], g.p) != pk.pow_xi(agg.tau[l])) return false;
  }
  return true;
}

inline Outcome reconstruct(std::span<const AnswerPair> answers, const PublicKey& pk,
                           const std::optional<VerificationKey>& vk) {
  if (answers.empty()) throw InvalidArgument("no answers to reconstruct");
  if (!is_verifiable(answers.front().scheme)) return Outcome::accept(aggregate(answers, pk).m);
  if (!vk) throw InvalidArgument("verifiable scheme without a verification key");
  if (!verify(answers, pk, *vk)) return Outcome::reject();
  return Outcome::accept(aggregate(answers, pk).m);
}

// A query function together with the weights the servers will apply.
struct QueryPlan {
  fss::FunctionDescription f;
  LaneMatrix weights;
};

// f = point function at iota with payload 1, weights = the items.
inline QueryPlan point_query_build(const DatabaseView& db, std::uint64_t iota,
                                   const fss::OutputGroup& group) {
  if (iota < 1 || iota > db.size()) throw InvalidArgument("index outside the database");
  return {fss::FunctionDescription::point(db.size(), iota, 1, group), db.items()};
}

enum class Aggregation { kCount, kSum };

using ItemPredicate = std::function<BigInt(std::span<const std::uint64_t> item)>;

// f = the predicate evaluated on every item; weights = ones (count) or the
// items themselves (sum).
inline QueryPlan predicate_query_build(const DatabaseView& db, const ItemPredicate& predicate,
                                       Aggregation mode, const fss::OutputGroup& group) {
  std::vector<BigInt> values;
  values.reserve(db.size());
  for (std::size_t i = 0; i < db.size(); ++i) values.push_back(predicate(db.items().row(i)));
  LaneMatrix weights = mode == Aggregation::kCount ? LaneMatrix::ones(db.size()) : db.items();
  return {fss::FunctionDescription::vector(std::move(values), group), std::move(weights)};
}

// sum_i weights[i][l] * f(i), evaluated in the clear.
inline std::vector<BigInt> evaluate_in_clear(const fss::FunctionDescription& f,
                                             const LaneMatrix& weights) {
  std::vector<BigInt> out(weights.lanes);
  for (std::size_t i = 0; i < weights.rows; ++i) {
    BigInt fx = f(i + 1);
    if (fx == 0) continue;
    for (std::size_t l = 0; l < weights.lanes; ++l) out[l] += fx * weights.at(i, l);
  }
  for (auto& v : out) v = f.group().reduce(v);
  return out;
}

}  // namespace pvpir

#endif  // PVPIR_PVPIR_HPP_
