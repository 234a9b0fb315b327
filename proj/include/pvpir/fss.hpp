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

#ifndef PVPIR_FSS_HPP_
#define PVPIR_FSS_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "pvpir/bigint.hpp"
#include "pvpir/errors.hpp"
#include "pvpir/field_group.hpp"
#include "pvpir/prg.hpp"
#include "pvpir/rng.hpp"

namespace pvpir::fss {

inline constexpr std::size_t kDefaultSecurityBits = 128;

// Number of tree levels for a domain of `n` points.
inline std::size_t ceil_log2(std::uint64_t n) {
  return n <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(n - 1));
}

// The additive group shares live in: Z_q, or the integers. Integer shares
// are masked with `value_bits + lambda` random bits.
class OutputGroup {
 public:
  static OutputGroup mod(const BigInt& q) {
    if (q <= 1) throw InvalidArgument("output group modulus must exceed 1");
    OutputGroup g;
    g.modulus_ = std::make_shared<const BigInt>(q);
    g.width_ = (bit_length(q) + 7) / 8;
    return g;
  }
  static OutputGroup integers(std::size_t value_bits) {
    OutputGroup g;
    g.value_bits_ = value_bits;
    return g;
  }

  bool is_modular() const { return modulus_ != nullptr; }
  const BigInt& modulus() const {
    if (!modulus_) throw InvalidArgument("integer group has no modulus");
    return *modulus_;
  }
  // Encoded width of a modular element.
  std::size_t element_bytes() const { return width_; }
  std::size_t value_bits() const { return value_bits_; }

  BigInt reduce(const BigInt& x) const {
    if (!modulus_) return x;
    BigInt out;
    mpz_mod(out.get_mpz_t(), x.get_mpz_t(), modulus_->get_mpz_t());
    return out;
  }

  // Masking bound for integer shares: every honest share magnitude stays
  // below 2^(share_bound_bits).
  std::size_t mask_bits(std::size_t security_bits) const {
    return value_bits_ + security_bits;
  }
  std::size_t share_bound_bits(std::size_t security_bits) const {
    return mask_bits(security_bits) + 8;
  }

  void write_element(ByteWriter& w, const BigInt& x) const {
    if (!modulus_) {
      w.bigint(x);
      return;
    }
    if (x < 0 || x >= *modulus_) throw InvalidArgument("element outside Z_q");
    Bytes fixed = to_fixed_bytes(x, width_);
    w.u16(static_cast<std::uint16_t>(width_));
    w.raw(fixed);
    w.u8(0);
  }
  BigInt read_element(ByteReader& r) const {
    if (!modulus_) return r.bigint();
    if (r.u16() != width_) throw DecodeError("element width mismatch");
    BigInt x = from_bytes_be(r.raw(width_));
    if (r.u8() != 0) throw DecodeError("negative group element");
    if (x >= *modulus_) throw DecodeError("element outside Z_q");
    return x;
  }

  friend bool operator==(const OutputGroup& a, const OutputGroup& b) {
    if (a.is_modular() != b.is_modular()) return false;
    if (!a.is_modular()) return true;
    return a.modulus_ == b.modulus_ || *a.modulus_ == *b.modulus_;
  }

 private:
  std::shared_ptr<const BigInt> modulus_;
  std::size_t width_ = 0;
  std::size_t value_bits_ = 0;
};

struct ShareValue {
  BigInt value;
  OutputGroup group;
};

struct PointFunction {
  std::uint64_t index;  // 1-based
  BigInt payload;
};

struct VectorFunction {
  std::vector<BigInt> values;
};

// A function over the index domain [1..N] into an output group.
class FunctionDescription {
 public:
  static FunctionDescription point(std::uint64_t domain_size, std::uint64_t index,
                                   const BigInt& payload, OutputGroup group) {
    if (domain_size == 0) throw InvalidArgument("empty domain");
    if (index < 1 || index > domain_size) throw InvalidArgument("point index outside [1, N]");
    BigInt beta = group.reduce(payload);
    return FunctionDescription(domain_size, std::move(group),
                               PointFunction{index, std::move(beta)});
  }
  static FunctionDescription vector(std::vector<BigInt> values, OutputGroup group) {
    if (values.empty()) throw InvalidArgument("empty domain");
    for (auto& v : values) v = group.reduce(v);
    std::uint64_t n = values.size();
    return FunctionDescription(n, std::move(group), VectorFunction{std::move(values)});
  }

  std::uint64_t domain_size() const { return domain_size_; }
  const OutputGroup& group() const { return group_; }
  bool is_point() const { return std::holds_alternative<PointFunction>(kind_); }
  const PointFunction& as_point() const { return std::get<PointFunction>(kind_); }
  const VectorFunction& as_vector() const { return std::get<VectorFunction>(kind_); }

  BigInt operator()(std::uint64_t x) const {
    check_domain(x);
    if (is_point()) {
      const auto& p = as_point();
      return x == p.index ? p.payload : BigInt(0);
    }
    return as_vector().values[x - 1];
  }

  std::vector<BigInt> to_vector() const {
    if (!is_point()) return as_vector().values;
    std::vector<BigInt> out(domain_size_);
    out[as_point().index - 1] = as_point().payload;
    return out;
  }

  void check_domain(std::uint64_t x) const {
    if (x < 1 || x > domain_size_) throw InvalidArgument("point outside the domain");
  }

 private:
  FunctionDescription(std::uint64_t n, OutputGroup group,
                      std::variant<PointFunction, VectorFunction> kind)
      : domain_size_(n), group_(std::move(group)), kind_(std::move(kind)) {}

  std::uint64_t domain_size_;
  OutputGroup group_;
  std::variant<PointFunction, VectorFunction> kind_;
};

// g(x) = alpha * f(x).
inline FunctionDescription scalar_mul_function(const BigInt& alpha,
                                               const FunctionDescription& f) {
  if (f.is_point()) {
    const auto& p = f.as_point();
    return FunctionDescription::point(f.domain_size(), p.index, alpha * p.payload, f.group());
  }
  std::vector<BigInt> values = f.as_vector().values;
  for (auto& v : values) v *= alpha;
  return FunctionDescription::vector(std::move(values), f.group());
}

inline FunctionDescription scalar_mul_function(const ExponentScalar& alpha,
                                               const FunctionDescription& f) {
  return scalar_mul_function(alpha.value(), f);
}

enum class Variant : std::uint8_t { kVector = 0x01, kDpf = 0x02 };

struct VectorKey {
  std::vector<BigInt> values;
};

struct CorrectionWord {
  prg::Seed seed;
  bool left_bit;
  bool right_bit;

  friend bool operator==(const CorrectionWord&, const CorrectionWord&) = default;
};

struct DpfKey {
  prg::Seed root;
  std::vector<CorrectionWord> levels;
  BigInt output_correction;
};

// One party's share of a function. Keys are immutable after generation.
struct FssKey {
  std::uint8_t party = 0;  // 1-based
  std::uint64_t domain_size = 0;
  OutputGroup group;
  std::variant<VectorKey, DpfKey> body;

  Variant variant() const {
    return std::holds_alternative<VectorKey>(body) ? Variant::kVector : Variant::kDpf;
  }
};

namespace detail {

inline std::size_t convert_blocks(const OutputGroup& group) {
  return (bit_length(group.modulus()) + 64 + 127) / 128;
}

// Leaf seed -> Z_q element (unreduced; callers reduce).
inline BigInt convert_raw(const prg::Seed& seed, std::size_t blocks) {
  std::vector<prg::Block> out;
  prg::stretch_many(std::span<const prg::Seed>(&seed, 1), blocks, out);
  return from_bytes_be({reinterpret_cast<const std::uint8_t*>(out.data()), blocks * 16});
}

// Big-endian integer held in `blocks` PRG blocks, reduced mod a word-sized q.
inline std::uint64_t reduce_words(const prg::Block* raw, std::size_t blocks, std::uint64_t q) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(raw);
  unsigned __int128 acc = 0;
  for (std::size_t w = 0; w < 2 * blocks; ++w) {
    std::uint64_t word;
    std::memcpy(&word, bytes + 8 * w, 8);
    word = __builtin_bswap64(word);
    acc = ((acc << 64) | word) % q;
  }
  return static_cast<std::uint64_t>(acc);
}

inline prg::Expansion corrected(prg::Expansion e, bool control, const CorrectionWord& cw) {
  if (control) {
    e.left = prg::xor_blocks(e.left, cw.seed);
    e.right = prg::xor_blocks(e.right, cw.seed);
    e.left_bit ^= cw.left_bit;
    e.right_bit ^= cw.right_bit;
  }
  return e;
}

inline std::vector<FssKey> dpf_gen(const FunctionDescription& f, Rng& rng) {
  const auto& point = f.as_point();
  const OutputGroup& group = f.group();
  const std::uint64_t n = f.domain_size();
  const std::size_t depth = ceil_log2(n);
  const std::uint64_t target = point.index - 1;

  prg::Seed s0, s1;
  rng.fill(s0);
  rng.fill(s1);
  DpfKey k0{s0, {}, {}};
  DpfKey k1{s1, {}, {}};
  bool t0 = false;
  bool t1 = true;

  for (std::size_t level = 0; level < depth; ++level) {
    const bool bit = (target >> (depth - 1 - level)) & 1;
    const prg::Expansion e0 = prg::expand(s0);
    const prg::Expansion e1 = prg::expand(s1);
    CorrectionWord cw;
    cw.seed = bit ? prg::xor_blocks(e0.left, e1.left) : prg::xor_blocks(e0.right, e1.right);
    cw.left_bit = e0.left_bit ^ e1.left_bit ^ bit ^ true;
    cw.right_bit = e0.right_bit ^ e1.right_bit ^ bit;
    auto advance = [&](const prg::Expansion& raw, prg::Seed& s, bool& t) {
      prg::Expansion e = corrected(raw, t, cw);
      s = bit ? e.right : e.left;
      t = bit ? e.right_bit : e.left_bit;
    };
    advance(e0, s0, t0);
    advance(e1, s1, t1);
    k0.levels.push_back(cw);
    k1.levels.push_back(cw);
  }

  const std::size_t blocks = convert_blocks(group);
  BigInt out = point.payload - convert_raw(s0, blocks) + convert_raw(s1, blocks);
  if (t1) out = -out;
  out = group.reduce(out);
  k0.output_correction = out;
  k1.output_correction = out;

  std::vector<FssKey> keys(2);
  keys[0] = {1, n, group, std::move(k0)};
  keys[1] = {2, n, group, std::move(k1)};
  return keys;
}

inline BigInt dpf_eval(const FssKey& key, const DpfKey& dpf, std::uint64_t x) {
  const std::size_t depth = dpf.levels.size();
  const std::uint64_t leaf = x - 1;
  prg::Seed s = dpf.root;
  bool t = key.party == 2;
  for (std::size_t level = 0; level < depth; ++level) {
    prg::Expansion e = corrected(prg::expand(s), t, dpf.levels[level]);
    const bool bit = (leaf >> (depth - 1 - level)) & 1;
    s = bit ? e.right : e.left;
    t = bit ? e.right_bit : e.left_bit;
  }
  BigInt y = convert_raw(s, convert_blocks(key.group));
  if (t) y += dpf.output_correction;
  if (key.party == 2) y = -y;
  return key.group.reduce(y);
}

// Breadth-first expansion down to the leaves [0, N).
inline void dpf_leaves(const FssKey& key, const DpfKey& dpf, std::vector<prg::Seed>& seeds,
                       std::vector<std::uint8_t>& bits) {
  const std::size_t depth = dpf.levels.size();
  const std::uint64_t n = key.domain_size;
  seeds.assign(1, dpf.root);
  bits.assign(1, key.party == 2 ? 1 : 0);
  seeds.reserve(n);
  bits.reserve(n);
  std::vector<prg::Block> in;
  std::vector<prg::Block> hashed;
  in.reserve(3 * ((n + 1) / 2));
  hashed.reserve(in.capacity());
  for (std::size_t level = 0; level < depth; ++level) {
    const std::size_t parents = seeds.size();
    in.resize(3 * parents);
    hashed.resize(3 * parents);
    for (std::size_t p = 0; p < parents; ++p) {
      for (std::uint32_t t = 0; t < 3; ++t) in[3 * p + t] = prg::tweaked(seeds[p], t);
    }
    prg::fixed_key_aes().hash(in, hashed);

    const CorrectionWord& cw = dpf.levels[level];
    const std::size_t below = depth - 1 - level;
    const std::uint64_t width = ((n - 1) >> below) + 1;
    seeds.resize(width);
    bits.resize(width);
    // Children overwrite parents in place, so walk from the right.
    for (std::uint64_t child = width; child-- > 0;) {
      const std::uint64_t parent = child >> 1;
      const bool right = child & 1;
      const prg::Block* h = &hashed[3 * parent];
      const bool control = bits[parent] != 0;
      prg::Seed s = h[right ? 1 : 0];
      bool t = (h[2][15] & (right ? 2 : 1)) != 0;
      if (control) {
        s = prg::xor_blocks(s, cw.seed);
        t ^= right ? cw.right_bit : cw.left_bit;
      }
      seeds[child] = s;
      bits[child] = t ? 1 : 0;
    }
  }
}

}  // namespace detail

// Splits f into k additive shares. kDpf requires a point function, k = 2,
// a modular output group and 128-bit security.
inline std::vector<FssKey> fss_gen(std::size_t security_bits, const FunctionDescription& f,
                                   std::size_t k, Rng& rng, Variant variant) {
  if (k < 2) throw InvalidArgument("function secret sharing needs at least two parties");
  if (k > 255) throw InvalidArgument("at most 255 parties");
  const OutputGroup& group = f.group();
  if (variant == Variant::kDpf) {
    if (k != 2) throw InvalidArgument("the tree DPF is two-party only");
    if (!f.is_point()) throw InvalidArgument("the tree DPF shares point functions only");
    if (!group.is_modular()) throw InvalidArgument("the tree DPF needs a modular output group");
    if (security_bits != prg::kSecurityBits) throw InvalidArgument("the tree DPF runs at 128-bit security");
    return detail::dpf_gen(f, rng);
  }

  const std::uint64_t n = f.domain_size();
  std::vector<BigInt> last = f.to_vector();
  std::vector<FssKey> keys(k);
  const std::size_t mask_bits = group.mask_bits(security_bits);
  for (std::size_t j = 0; j + 1 < k; ++j) {
    VectorKey share;
    share.values.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      share.values[i] = group.is_modular() ? rng.below(group.modulus()) : rng.bits(mask_bits);
      last[i] -= share.values[i];
    }
    keys[j] = {static_cast<std::uint8_t>(j + 1), n, group, std::move(share)};
  }
  for (auto& v : last) v = group.reduce(v);
  keys[k - 1] = {static_cast<std::uint8_t>(k), n, group, VectorKey{std::move(last)}};
  return keys;
}

inline ShareValue fss_eval(std::size_t party, const FssKey& key, std::uint64_t x) {
  if (party != key.party) throw InvalidArgument("key belongs to another party");
  if (x < 1 || x > key.domain_size) throw InvalidArgument("point outside the domain");
  if (const auto* v = std::get_if<VectorKey>(&key.body)) {
    return {v->values[x - 1], key.group};
  }
  return {detail::dpf_eval(key, std::get<DpfKey>(key.body), x), key.group};
}

inline std::vector<ShareValue> fss_eval_full(std::size_t party, const FssKey& key) {
  if (party != key.party) throw InvalidArgument("key belongs to another party");
  std::vector<ShareValue> out;
  out.reserve(key.domain_size);
  if (const auto* v = std::get_if<VectorKey>(&key.body)) {
    for (const auto& value : v->values) out.push_back({value, key.group});
    return out;
  }
  const auto& dpf = std::get<DpfKey>(key.body);
  std::vector<prg::Seed> seeds;
  std::vector<std::uint8_t> bits;
  detail::dpf_leaves(key, dpf, seeds, bits);
  const std::size_t blocks = detail::convert_blocks(key.group);
  std::vector<prg::Block> stretched;
  BigInt leaf;
  const mpz_srcptr modulus = key.group.modulus().get_mpz_t();
  const bool word_sized = mpz_fits_ulong_p(modulus) != 0;
  const std::uint64_t q = word_sized ? mpz_get_ui(modulus) : 0;
  const std::uint64_t correction = word_sized ? mpz_get_ui(dpf.output_correction.get_mpz_t()) : 0;
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < seeds.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, seeds.size() - start);
    prg::stretch_many(std::span<const prg::Seed>(seeds).subspan(start, count), blocks, stretched);
    for (std::size_t i = 0; i < count; ++i) {
      const prg::Block* raw = stretched.data() + i * blocks;
      ShareValue& share = out.emplace_back(ShareValue{BigInt(), key.group});
      if (word_sized) {
        std::uint64_t y = detail::reduce_words(raw, blocks, q);
        if (bits[start + i]) y = static_cast<std::uint64_t>((unsigned __int128)y + correction) % q;
        if (key.party == 2 && y != 0) y = q - y;
        share.value = static_cast<unsigned long>(y);
        continue;
      }
      mpz_import(leaf.get_mpz_t(), blocks * 16, 1, 1, 1, 0, raw);
      if (bits[start + i]) leaf += dpf.output_correction;
      if (key.party == 2) leaf = -leaf;
      mpz_mod(share.value.get_mpz_t(), leaf.get_mpz_t(), modulus);
    }
  }
  return out;
}

// Per-lane weighted sums  sum_i weights[i * lanes + l] * Eval(party, key, i + 1),
// computed in one full-domain pass without materialising the shares.
inline std::vector<BigInt> fss_inner_product(const FssKey& key,
                                             std::span<const std::uint64_t> weights,
                                             std::size_t lanes) {
  if (lanes == 0 || weights.size() != key.domain_size * lanes) {
    throw InvalidArgument("weight matrix does not match the key domain");
  }
  std::vector<BigInt> acc(lanes);
  auto finish = [&] {
    for (auto& a : acc) a = key.group.reduce(a);
    return acc;
  };
  if (const auto* v = std::get_if<VectorKey>(&key.body)) {
    for (std::size_t i = 0; i < v->values.size(); ++i) {
      const mpz_srcptr value = v->values[i].get_mpz_t();
      for (std::size_t l = 0; l < lanes; ++l) {
        const std::uint64_t w = weights[i * lanes + l];
        if (w == 0) continue;
        if (w == 1) {
          mpz_add(acc[l].get_mpz_t(), acc[l].get_mpz_t(), value);
        } else {
          mpz_addmul_ui(acc[l].get_mpz_t(), value, static_cast<unsigned long>(w));
        }
      }
    }
    return finish();
  }

  const auto& dpf = std::get<DpfKey>(key.body);
  std::vector<prg::Seed> seeds;
  std::vector<std::uint8_t> bits;
  detail::dpf_leaves(key, dpf, seeds, bits);
  const std::size_t blocks = detail::convert_blocks(key.group);
  std::vector<BigInt> control_weight(lanes);
  std::vector<prg::Block> stretched;
  BigInt leaf;
  constexpr std::size_t kChunk = 1024;
  for (std::size_t start = 0; start < seeds.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, seeds.size() - start);
    prg::stretch_many(std::span<const prg::Seed>(seeds).subspan(start, count), blocks, stretched);
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t row = (start + i) * lanes;
      mpz_import(leaf.get_mpz_t(), blocks * 16, 1, 1, 1, 0, stretched.data() + i * blocks);
      const bool control = bits[start + i] != 0;
      for (std::size_t l = 0; l < lanes; ++l) {
        const std::uint64_t w = weights[row + l];
        if (w == 0) continue;
        mpz_addmul_ui(acc[l].get_mpz_t(), leaf.get_mpz_t(), static_cast<unsigned long>(w));
        if (control) control_weight[l] += static_cast<unsigned long>(w);
      }
    }
  }
  for (std::size_t l = 0; l < lanes; ++l) {
    acc[l] += control_weight[l] * dpf.output_correction;
    if (key.party == 2) acc[l] = -acc[l];
  }
  return finish();
}

inline ShareValue dec_plus(std::span<const ShareValue> shares) {
  if (shares.empty()) throw InvalidArgument("nothing to reconstruct");
  ShareValue out{0, shares.front().group};
  for (const auto& s : shares) {
    if (!(s.group == out.group)) throw InvalidArgument("shares from different output groups");
    out.value += s.value;
  }
  out.value = out.group.reduce(out.value);
  return out;
}

// Wire format: variant byte, party byte, then
//   vector: u32 count, elements;
//   dpf:    16-byte root seed, u8 level count, u32 domain size,
//           per level 16-byte seed correction + control-bit byte,
//           output correction element.
inline void encode_key(ByteWriter& w, const FssKey& key) {
  w.u8(static_cast<std::uint8_t>(key.variant()));
  w.u8(key.party);
  if (const auto* v = std::get_if<VectorKey>(&key.body)) {
    w.u32(static_cast<std::uint32_t>(v->values.size()));
    for (const auto& x : v->values) key.group.write_element(w, x);
    return;
  }
  const auto& dpf = std::get<DpfKey>(key.body);
  w.raw(dpf.root);
  w.u8(static_cast<std::uint8_t>(dpf.levels.size()));
  w.u32(static_cast<std::uint32_t>(key.domain_size));
  for (const auto& cw : dpf.levels) {
    w.raw(cw.seed);
    w.u8(static_cast<std::uint8_t>((cw.left_bit ? 1 : 0) | (cw.right_bit ? 2 : 0)));
  }
  key.group.write_element(w, dpf.output_correction);
}

inline FssKey decode_key(ByteReader& r, const OutputGroup& group) {
  FssKey key;
  key.group = group;
  const std::uint8_t variant = r.u8();
  key.party = r.u8();
  if (key.party == 0) throw DecodeError("party index must be positive");
  if (variant == static_cast<std::uint8_t>(Variant::kVector)) {
    const std::uint32_t count = r.u32();
    if (count == 0) throw DecodeError("empty vector key");
    // Every element takes at least three bytes on the wire.
    if (count > r.remaining() / 3) throw DecodeError("vector key longer than its frame");
    VectorKey v;
    v.values.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) v.values.push_back(group.read_element(r));
    key.domain_size = count;
    key.body = std::move(v);
    return key;
  }
  if (variant != static_cast<std::uint8_t>(Variant::kDpf)) throw DecodeError("unknown key variant");
  if (!group.is_modular()) throw DecodeError("DPF key over the integers");
  if (key.party > 2) throw DecodeError("DPF keys are two-party");
  DpfKey dpf;
  auto root = r.raw(prg::kSeedBytes);
  std::copy(root.begin(), root.end(), dpf.root.begin());
  const std::uint8_t depth = r.u8();
  key.domain_size = r.u32();
  if (key.domain_size == 0 || ceil_log2(key.domain_size) != depth) {
    throw DecodeError("DPF depth does not match the domain");
  }
  for (std::uint8_t level = 0; level < depth; ++level) {
    CorrectionWord cw;
    auto seed = r.raw(prg::kSeedBytes);
    std::copy(seed.begin(), seed.end(), cw.seed.begin());
    const std::uint8_t flags = r.u8();
    if (flags > 3) throw DecodeError("bad control bits");
    cw.left_bit = flags & 1;
    cw.right_bit = flags & 2;
    dpf.levels.push_back(cw);
  }
  dpf.output_correction = group.read_element(r);
  key.body = std::move(dpf);
  return key;
}

inline Bytes serialize_key(const FssKey& key) {
  ByteWriter w;
  encode_key(w, key);
  return std::move(w).take();
}

}  // namespace pvpir::fss

#endif  // PVPIR_FSS_HPP_
