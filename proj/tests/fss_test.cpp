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

#include "pvpir/fss.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <set>
#include <vector>

#include "pvpir/prg.hpp"
#include "pvpir/rng.hpp"

namespace pvpir::fss {
namespace {

const OutputGroup kZ11 = OutputGroup::mod(11);

std::vector<ShareValue> eval_all(const std::vector<FssKey>& keys, std::uint64_t x) {
  std::vector<ShareValue> out;
  for (const auto& key : keys) out.push_back(fss_eval(key.party, key, x));
  return out;
}

BigInt reconstruct_at(const std::vector<FssKey>& keys, std::uint64_t x) {
  auto shares = eval_all(keys, x);
  return dec_plus(shares).value;
}

TEST(VectorFssTest, HandWorkedFourPointExample) {
  // (3,7,5,9) + (8,5,6,2) = (11,12,11,11) = (0,1,0,0) mod 11.
  FssKey k1{1, 4, kZ11, VectorKey{{3, 7, 5, 9}}};
  FssKey k2{2, 4, kZ11, VectorKey{{8, 5, 6, 2}}};
  const std::vector<FssKey> keys{k1, k2};
  auto f = FunctionDescription::point(4, 2, 1, kZ11);
  for (std::uint64_t x = 1; x <= 4; ++x) EXPECT_EQ(reconstruct_at(keys, x), f(x));
  EXPECT_EQ(fss_eval(1, k1, 2).value, 7);
}

TEST(VectorFssTest, DecPlusExamples) {
  auto sum = [](std::vector<BigInt> values) {
    std::vector<ShareValue> shares;
    for (auto& v : values) shares.push_back({v, kZ11});
    return dec_plus(shares).value;
  };
  EXPECT_EQ(sum({4, 7}), 0);
  EXPECT_EQ(sum({3, 8}), 0);
  EXPECT_EQ(sum({7, 5}), 1);
  EXPECT_EQ(sum({9}), 9);
  std::vector<ShareValue> mixed{{1, kZ11}, {1, OutputGroup::mod(13)}};
  EXPECT_THROW(dec_plus(mixed), InvalidArgument);
  EXPECT_THROW(dec_plus({}), InvalidArgument);
}

TEST(VectorFssTest, GeneratedSharesSumToFunction) {
  Rng rng = Rng::from_seed(21);
  for (std::size_t k : {2u, 3u, 5u}) {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<BigInt> values(1 + rng.uniform(64));
      for (auto& v : values) v = rng.below(11);
      auto f = FunctionDescription::vector(values, kZ11);
      auto keys = fss_gen(128, f, k, rng, Variant::kVector);
      ASSERT_EQ(keys.size(), k);
      for (std::uint64_t x = 1; x <= f.domain_size(); ++x) EXPECT_EQ(reconstruct_at(keys, x), f(x));
    }
  }
}

TEST(VectorFssTest, IntegerSharesSumOverZ) {
  Rng rng = Rng::from_seed(22);
  const OutputGroup ints = OutputGroup::integers(64);
  std::vector<BigInt> values(50);
  for (auto& v : values) v = rng.bits(64) - rng.bits(64);
  auto f = FunctionDescription::vector(values, ints);
  auto keys = fss_gen(128, f, 3, rng, Variant::kVector);
  for (std::uint64_t x = 1; x <= 50; ++x) {
    EXPECT_EQ(reconstruct_at(keys, x), values[x - 1]);
    for (const auto& key : keys) {
      EXPECT_LT(bit_length(fss_eval(key.party, key, x).value), ints.share_bound_bits(128));
    }
  }
}

TEST(FssGenTest, RejectsBadParameters) {
  Rng rng = Rng::from_seed(23);
  auto f = FunctionDescription::point(8, 3, 1, kZ11);
  EXPECT_THROW(fss_gen(128, f, 1, rng, Variant::kVector), InvalidArgument);
  EXPECT_THROW(fss_gen(128, f, 3, rng, Variant::kDpf), InvalidArgument);
  auto v = FunctionDescription::vector({1, 2, 3}, kZ11);
  EXPECT_THROW(fss_gen(128, v, 2, rng, Variant::kDpf), InvalidArgument);
  auto zf = FunctionDescription::point(8, 3, 1, OutputGroup::integers(16));
  EXPECT_THROW(fss_gen(128, zf, 2, rng, Variant::kDpf), InvalidArgument);
  EXPECT_THROW(FunctionDescription::point(8, 0, 1, kZ11), InvalidArgument);
  EXPECT_THROW(FunctionDescription::point(8, 9, 1, kZ11), InvalidArgument);
  auto keys = fss_gen(128, f, 2, rng, Variant::kVector);
  EXPECT_THROW(fss_eval(1, keys[0], 0), InvalidArgument);
  EXPECT_THROW(fss_eval(1, keys[0], 9), InvalidArgument);
  EXPECT_THROW(fss_eval(2, keys[0], 1), InvalidArgument);
}

TEST(DpfTest, BruteForceOverAllPointsOf256) {
  Rng rng = Rng::from_seed(24);
  const OutputGroup group = OutputGroup::mod(BigInt("340282366920938463463374607431768211297"));
  for (int trial = 0; trial < 10; ++trial) {
    const std::uint64_t iota = 1 + rng.uniform(256);
    const BigInt beta = rng.below(group.modulus());
    auto f = FunctionDescription::point(256, iota, beta, group);
    auto keys = fss_gen(128, f, 2, rng, Variant::kDpf);
    for (std::uint64_t x = 1; x <= 256; ++x) {
      EXPECT_EQ(reconstruct_at(keys, x), x == iota ? beta : BigInt(0)) << x;
    }
  }
}

TEST(DpfTest, ToyGroupAndOddDomains) {
  Rng rng = Rng::from_seed(25);
  for (std::uint64_t n : {1ull, 2ull, 3ull, 5ull, 100ull, 1000ull}) {
    const std::uint64_t iota = 1 + rng.uniform(n);
    auto f = FunctionDescription::point(n, iota, 7, kZ11);
    auto keys = fss_gen(128, f, 2, rng, Variant::kDpf);
    EXPECT_EQ(std::get<DpfKey>(keys[0].body).levels.size(), ceil_log2(n));
    for (std::uint64_t x = 1; x <= n; ++x) {
      EXPECT_EQ(reconstruct_at(keys, x), x == iota ? 7 : 0);
    }
  }
}

TEST(DpfTest, EvalIsDeterministic) {
  Rng rng = Rng::from_seed(26);
  auto keys = fss_gen(128, FunctionDescription::point(64, 5, 3, kZ11), 2, rng, Variant::kDpf);
  for (std::uint64_t x = 1; x <= 64; ++x) {
    EXPECT_EQ(fss_eval(1, keys[0], x).value, fss_eval(1, keys[0], x).value);
    EXPECT_EQ(fss_eval(2, keys[1], x).value, fss_eval(2, keys[1], x).value);
  }
}

TEST(FullEvalTest, MatchesPointwiseEval) {
  Rng rng = Rng::from_seed(27);
  const OutputGroup group = OutputGroup::mod(BigInt("1000000007"));
  for (std::uint64_t n : {1024ull, 1000ull, 7ull}) {
    auto f = FunctionDescription::point(n, 1 + rng.uniform(n), 12345, group);
    for (auto variant : {Variant::kDpf, Variant::kVector}) {
      auto keys = fss_gen(128, f, 2, rng, variant);
      for (const auto& key : keys) {
        auto full = fss_eval_full(key.party, key);
        ASSERT_EQ(full.size(), n);
        for (std::uint64_t x = 1; x <= n; ++x) {
          EXPECT_EQ(full[x - 1].value, fss_eval(key.party, key, x).value);
        }
      }
    }
  }
}

TEST(FullEvalTest, InnerProductMatchesMaterializedSum) {
  Rng rng = Rng::from_seed(28);
  const OutputGroup group = OutputGroup::mod(BigInt("1000000007"));
  const std::uint64_t n = 777;
  const std::size_t lanes = 3;
  std::vector<std::uint64_t> weights(n * lanes);
  for (auto& w : weights) w = rng.uniform(1u << 31);
  auto f = FunctionDescription::point(n, 300, 99, group);
  for (auto variant : {Variant::kDpf, Variant::kVector}) {
    auto keys = fss_gen(128, f, 2, rng, variant);
    std::vector<BigInt> total(lanes);
    for (const auto& key : keys) {
      auto full = fss_eval_full(key.party, key);
      auto fused = fss_inner_product(key, weights, lanes);
      for (std::size_t l = 0; l < lanes; ++l) {
        BigInt expect = 0;
        for (std::uint64_t i = 0; i < n; ++i) expect += full[i].value * weights[i * lanes + l];
        EXPECT_EQ(fused[l], group.reduce(expect));
        total[l] += fused[l];
      }
    }
    for (std::size_t l = 0; l < lanes; ++l) {
      EXPECT_EQ(group.reduce(total[l]), group.reduce(BigInt(99) * weights[299 * lanes + l]));
    }
  }
}

TEST(FullEvalTest, FasterThanIndependentEvals) {
  Rng rng = Rng::from_seed(29);
  const OutputGroup group = OutputGroup::mod(BigInt("1000000007"));
  const std::uint64_t n = 1 << 16;
  auto keys = fss_gen(128, FunctionDescription::point(n, 4242, 1, group), 2, rng, Variant::kDpf);
  using Clock = std::chrono::steady_clock;
  // Best of three for each side.
  double full_s = 1e9;
  double pointwise_s = 1e9;
  BigInt sink = 0;
  for (int rep = 0; rep < 3; ++rep) {
    auto t0 = Clock::now();
    auto full = fss_eval_full(1, keys[0]);
    auto t1 = Clock::now();
    for (std::uint64_t x = 1; x <= n; ++x) sink += fss_eval(1, keys[0], x).value;
    auto t2 = Clock::now();
    full_s = std::min(full_s, std::chrono::duration<double>(t1 - t0).count());
    pointwise_s = std::min(pointwise_s, std::chrono::duration<double>(t2 - t1).count());
    sink += full[4241].value;
  }
  EXPECT_GE(pointwise_s, 4 * full_s) << "full " << full_s << "s, pointwise " << pointwise_s << "s";
  EXPECT_GE(sink, 0);
}

TEST(KeySizeTest, DpfBytesAreAffineInDepth) {
  Rng rng = Rng::from_seed(30);
  for (const OutputGroup& group : {kZ11, OutputGroup::mod(BigInt(1) << 3071) }) {
    std::vector<std::size_t> sizes;
    for (std::size_t depth = 8; depth <= 20; ++depth) {
      const std::uint64_t n = 1ull << depth;
      auto keys = fss_gen(128, FunctionDescription::point(n, n / 3, 1, group), 2, rng, Variant::kDpf);
      sizes.push_back(serialize_key(keys[0]).size());
      EXPECT_EQ(serialize_key(keys[1]).size(), sizes.back());
    }
    // Constant step per level: 16-byte seed correction plus one flag byte.
    for (std::size_t i = 1; i < sizes.size(); ++i) EXPECT_EQ(sizes[i] - sizes[i - 1], 17u);
    // Fixed part: variant, party, root, depth, domain size, output correction.
    EXPECT_EQ(sizes.front() - 8 * 17, 1 + 1 + 16 + 1 + 4 + 3 + group.element_bytes());
    if (group == kZ11) {
      const double ratio = static_cast<double>(sizes.back()) / sizes[2];
      EXPECT_GE(ratio, 1.8);
      EXPECT_LE(ratio, 2.2);
    }
  }
}

TEST(KeyEncodingTest, RoundTrip) {
  Rng rng = Rng::from_seed(31);
  const OutputGroup ints = OutputGroup::integers(40);
  for (int trial = 0; trial < 50; ++trial) {
    const std::uint64_t n = 1 + rng.uniform(300);
    auto f = FunctionDescription::point(n, 1 + rng.uniform(n), rng.below(11), kZ11);
    auto variant = trial % 2 ? Variant::kDpf : Variant::kVector;
    for (const auto& key : fss_gen(128, f, 2, rng, variant)) {
      Bytes b = serialize_key(key);
      ByteReader r(b);
      FssKey back = decode_key(r, kZ11);
      EXPECT_TRUE(r.done());
      EXPECT_EQ(serialize_key(back), b);
      for (std::uint64_t x = 1; x <= n; ++x) {
        EXPECT_EQ(fss_eval(key.party, back, x).value, fss_eval(key.party, key, x).value);
      }
    }
    auto zf = FunctionDescription::vector({rng.bits(40), -rng.bits(40)}, ints);
    for (const auto& key : fss_gen(128, zf, 3, rng, Variant::kVector)) {
      Bytes b = serialize_key(key);
      ByteReader r(b);
      EXPECT_EQ(serialize_key(decode_key(r, ints)), b);
    }
  }
}

TEST(KeyEncodingTest, RejectsCorruptKeys) {
  Rng rng = Rng::from_seed(32);
  auto keys = fss_gen(128, FunctionDescription::point(16, 3, 1, kZ11), 2, rng, Variant::kDpf);
  Bytes good = serialize_key(keys[0]);
  Bytes bad_variant = good;
  bad_variant[0] = 9;
  Bytes bad_depth = good;
  bad_depth[18] = 5;
  Bytes truncated(good.begin(), good.end() - 1);
  for (const Bytes& b : {bad_variant, bad_depth, truncated}) {
    ByteReader r(b);
    EXPECT_THROW(decode_key(r, kZ11), DecodeError);
  }
}

TEST(ScalarMulTest, Examples) {
  auto g = scalar_mul_function(3, FunctionDescription::point(4, 2, 1, kZ11));
  ASSERT_TRUE(g.is_point());
  EXPECT_EQ(g.as_point().index, 2u);
  EXPECT_EQ(g.as_point().payload, 3);
  auto zero = scalar_mul_function(0, FunctionDescription::vector({1, 5, 7}, kZ11));
  for (std::uint64_t x = 1; x <= 3; ++x) EXPECT_EQ(zero(x), 0);
  auto v = scalar_mul_function(ExponentScalar::mod(3, 11), FunctionDescription::vector({0, 1, 0, 0}, kZ11));
  EXPECT_EQ(v.to_vector(), (std::vector<BigInt>{0, 3, 0, 0}));
}

TEST(ScalarMulTest, SharingCommutesWithScaling) {
  // With identical randomness, the first k-1 shares coincide, so the last
  // shares differ by exactly the scaling of f.
  auto f = FunctionDescription::vector({2, 0, 9, 4, 1}, kZ11);
  const BigInt alpha = 7;
  Rng r1 = Rng::from_seed(33);
  Rng r2 = Rng::from_seed(33);
  auto scaled_then_shared = fss_gen(128, scalar_mul_function(alpha, f), 3, r1, Variant::kVector);
  auto shared = fss_gen(128, f, 3, r2, Variant::kVector);
  for (std::uint64_t x = 1; x <= 5; ++x) {
    BigInt direct = reconstruct_at(scaled_then_shared, x);
    BigInt per_share = 0;
    for (const auto& key : shared) per_share += alpha * fss_eval(key.party, key, x).value;
    EXPECT_EQ(direct, kZ11.reduce(per_share));
    EXPECT_EQ(fss_eval(1, scaled_then_shared[0], x).value, fss_eval(1, shared[0], x).value);
  }
}

TEST(PrivacyTest, FirstShareIndependentOfFunction) {
  // Component 1 of party 1's key for two different functions.
  Rng rng = Rng::from_seed(34);
  constexpr int kTrials = 10000;
  auto f0 = FunctionDescription::point(4, 1, 1, kZ11);
  auto f1 = FunctionDescription::point(4, 2, 5, kZ11);
  std::vector<double> c0(11, 0), c1(11, 0);
  for (int i = 0; i < kTrials; ++i) {
    c0[std::get<VectorKey>(fss_gen(128, f0, 2, rng, Variant::kVector)[0].body).values[0].get_ui()]++;
    c1[std::get<VectorKey>(fss_gen(128, f1, 2, rng, Variant::kVector)[0].body).values[0].get_ui()]++;
  }
  // Two-sample chi-square homogeneity, 10 degrees of freedom: p = 0.001 at 29.59.
  double chi2 = 0;
  for (int v = 0; v < 11; ++v) {
    const double pooled = (c0[v] + c1[v]) / 2;
    chi2 += (c0[v] - pooled) * (c0[v] - pooled) / pooled + (c1[v] - pooled) * (c1[v] - pooled) / pooled;
  }
  EXPECT_LT(chi2, 29.59);
}

TEST(PrgTest, ExpansionIsDeterministicAndBalanced) {
  Rng rng = Rng::from_seed(35);
  constexpr int kSeeds = 10000;
  std::set<prg::Block> lefts;
  std::uint64_t ones = 0;
  std::uint64_t total = 0;
  for (int i = 0; i < kSeeds; ++i) {
    prg::Seed s;
    rng.fill(s);
    const auto a = prg::expand(s);
    const auto b = prg::expand(s);
    ASSERT_EQ(a.left, b.left);
    ASSERT_EQ(a.right, b.right);
    ASSERT_EQ(a.left_bit, b.left_bit);
    ASSERT_EQ(a.right_bit, b.right_bit);
    lefts.insert(a.left);
    for (const auto* blk : {&a.left, &a.right}) {
      for (std::uint8_t byte : *blk) ones += __builtin_popcount(byte);
      total += 128;
    }
    ones += a.left_bit + a.right_bit;
    total += 2;
  }
  EXPECT_EQ(lefts.size(), static_cast<std::size_t>(kSeeds));
  const double sigma = std::sqrt(total * 0.25);
  EXPECT_LT(std::abs(static_cast<double>(ones) - total / 2.0), 5 * sigma);
}

}  // namespace
}  // namespace pvpir::fss
