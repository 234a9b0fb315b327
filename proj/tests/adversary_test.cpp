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

#include "pvpir/adversary.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

namespace pvpir::adversary {
namespace {

const DlGroup kToyGroup{23, 11, 4};

SchemeKeys toy_dl(SchemeId scheme) { return keys_from_group(scheme, kToyGroup); }
SchemeKeys toy_rsa() { return keys_from_rsa(RsaKeyPair::from_parts(5, 11, 3, 2)); }

// Exact accept-wrong rate of additive tampering over Z_55: pairs (delta, u)
// with 2^delta == u^27, over delta in [1, 54] and units u.
double rsa_toy_rate() {
  long hits = 0;
  long total = 0;
  for (long delta = 1; delta < 55; ++delta) {
    long lhs = 1;
    for (long i = 0; i < delta; ++i) lhs = lhs * 2 % 55;
    for (long u = 1; u < 55; ++u) {
      if (std::gcd(u, 55L) != 1) continue;
      long rhs = 1;
      for (int i = 0; i < 27; ++i) rhs = rhs * u % 55;
      ++total;
      if (lhs == rhs) ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

void expect_within_3_sigma(const ExpResult& r, double p) {
  const double n = static_cast<double>(r.trials);
  const double sigma = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(r.rate(), p, 3 * sigma) << r.accepted_wrong << " of " << r.trials;
}

TEST(StrategyTest, Validation) {
  EXPECT_NO_THROW(TamperStrategy::honest().validate(2));
  EXPECT_NO_THROW(TamperStrategy::additive({1}).validate(2));
  EXPECT_THROW(TamperStrategy::additive({1, 2}).validate(2), InvalidArgument);
  EXPECT_THROW(TamperStrategy::additive({3}).validate(2), InvalidArgument);
  EXPECT_NO_THROW(TamperStrategy::additive({3, 1}).validate(3));
  EXPECT_THROW(TamperStrategy::additive({0}).validate(3), InvalidArgument);
  EXPECT_THROW(TamperStrategy::additive({}).validate(2), InvalidArgument);
  TamperStrategy bad = TamperStrategy::honest();
  bad.targets = {1};
  EXPECT_THROW(bad.validate(2), InvalidArgument);
  EXPECT_EQ(parse_tamper("swap"), TamperKind::kSwapComponents);
  EXPECT_FALSE(parse_tamper("nope").has_value());
}

TEST(ExpVerTest, HonestIsComplete) {
  for (auto keys : {toy_dl(SchemeId::kDlPredicate), toy_dl(SchemeId::kDlPoint), toy_rsa(),
                    toy_dl(SchemeId::kDlPredicate).as_plain()}) {
    for (std::size_t k : {2, 3}) {
      ExpConfig config;
      config.k = k;
      config.trials = 200;
      ExpResult r = run_exp_ver(keys, config);
      EXPECT_EQ(r.accepted_wrong, 0u);
      EXPECT_EQ(r.accepted, r.trials);
    }
  }
}

TEST(ExpVerTest, DlToyRateIsOneOverQ) {
  for (auto scheme : {SchemeId::kDlPredicate, SchemeId::kDlPoint}) {
    ExpConfig config;
    config.strategy = TamperStrategy::additive({1});
    config.trials = 20000;
    config.seed = 5;
    ExpResult r = run_exp_ver(toy_dl(scheme), config);
    expect_within_3_sigma(r, 1.0 / 11);
    EXPECT_EQ(r.accepted, r.accepted_wrong);
    EXPECT_EQ(r.extraction_checks, r.accepted);
    EXPECT_EQ(r.extraction_failures, 0u);
  }
}

TEST(ExpVerTest, RsaToyRateMatchesEnumeration) {
  const double p = rsa_toy_rate();
  EXPECT_DOUBLE_EQ(p, 1.0 / 40);
  ExpConfig config;
  config.strategy = TamperStrategy::additive({2});
  config.k = 3;
  config.trials = 20000;
  config.seed = 6;
  ExpResult r = run_exp_ver(toy_rsa(), config);
  expect_within_3_sigma(r, p);
  EXPECT_GT(r.extraction_checks, 0u);
  EXPECT_EQ(r.extraction_failures, 0u);
}

TEST(ExpVerTest, PlainAcceptsEveryTamper) {
  ExpConfig config;
  config.strategy = TamperStrategy::additive({1});
  config.trials = 300;
  ExpResult r = run_exp_ver(toy_dl(SchemeId::kDlPredicate).as_plain(), config);
  EXPECT_EQ(r.accepted_wrong, r.trials);
}

TEST(ExpVerTest, OtherStrategiesStayNearOneOverQ) {
  for (auto s : {TamperStrategy::replace({1}), TamperStrategy::swap({1})}) {
    ExpConfig config;
    config.strategy = s;
    config.trials = 4000;
    ExpResult r = run_exp_ver(toy_dl(SchemeId::kDlPredicate), config);
    EXPECT_LT(r.rate(), 0.2);
    EXPECT_EQ(r.extraction_failures, 0u);
  }
}

TEST(ExpVerTest, RecordsAreJsonLines) {
  std::ostringstream out;
  ExpConfig config;
  config.strategy = TamperStrategy::additive({1});
  config.trials = 5;
  config.records = &out;
  config.record_transcripts = true;
  run_exp_ver(toy_dl(SchemeId::kDlPoint), config);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    auto rec = nlohmann::json::parse(line);
    EXPECT_EQ(rec["trial"], lines);
    EXPECT_EQ(rec["scheme"], "pi3");
    EXPECT_EQ(rec["transcript"]["answers"].size(), 2u);
    ++lines;
  }
  EXPECT_EQ(lines, 5);
}

TEST(ExpVerTest, SeedReproducible) {
  ExpConfig config;
  config.strategy = TamperStrategy::additive({1});
  config.trials = 500;
  config.seed = 77;
  auto keys = toy_dl(SchemeId::kDlPredicate);
  EXPECT_EQ(run_exp_ver(keys, config).accepted_wrong, run_exp_ver(keys, config).accepted_wrong);
}

TEST(SelectiveFailureTest, FrequenciesMatch) {
  auto keys = toy_dl(SchemeId::kDlPoint);
  auto db = DatabaseView::from_values({3, 1, 4, 1, 5, 2, 6, 5});
  auto g = keys.pk.share_group();
  auto f0 = fss::FunctionDescription::point(8, 1, 1, g);
  auto f1 = fss::FunctionDescription::point(8, 2, 1, g);

  auto honest = run_selective_failure_probe(keys, db, TamperStrategy::honest(), f0, f1, 2, 200, 1);
  EXPECT_EQ(honest.frequency(0), 1.0);
  EXPECT_EQ(honest.frequency(1), 1.0);
  EXPECT_EQ(honest.z(), 0.0);

  auto noop = run_selective_failure_probe(keys, db, TamperStrategy::additive({1}, 0, 0), f0, f1,
                                          2, 200, 2);
  EXPECT_EQ(noop.frequency(0), 1.0);
  EXPECT_EQ(noop.frequency(1), 1.0);

  auto fixed = run_selective_failure_probe(keys, db, TamperStrategy::additive({1}, 3), f0, f1,
                                           2, 5000, 3);
  EXPECT_LT(std::abs(fixed.z()), 3);
  EXPECT_NEAR(fixed.frequency(0), 1.0 / 11, 0.03);
}

TEST(SelectiveFailureTest, ZStatistic) {
  SelectiveFailureResult r;
  r.trials = 100;
  r.accepts[0] = 60;
  r.accepts[1] = 40;
  // pooled 0.5, se = sqrt(0.25 * 0.02)
  EXPECT_NEAR(r.z(), 0.2 / std::sqrt(0.005), 1e-12);
  r.accepts[0] = r.accepts[1] = 0;
  EXPECT_EQ(r.z(), 0.0);
}

TEST(DistinguishTest, UniformMarginal) {
  auto g = fss::OutputGroup::mod(11);
  auto f0 = fss::FunctionDescription::vector({0, 0, 0}, g);
  auto f1 = fss::FunctionDescription::vector({10, 5, 7}, g);
  auto r = fss_distinguish_probe(f0, f1, 2, 10000, 1, 9);
  EXPECT_EQ(r.degrees_of_freedom, 10u);
  EXPECT_GT(r.p_value, 0.001);
  auto again = fss_distinguish_probe(f0, f1, 2, 10000, 1, 9);
  EXPECT_EQ(r.statistic, again.statistic);
  EXPECT_THROW(fss_distinguish_probe(f0, f1, 2, 10, 4, 9), InvalidArgument);
}

TEST(DistinguishTest, PValueOracle) {
  // Upper tail of chi-square with 2 dof is exp(-x / 2).
  boost::math::chi_squared dist(2);
  EXPECT_NEAR(boost::math::cdf(boost::math::complement(dist, 6.0)), std::exp(-3.0), 1e-12);
}

}  // namespace
}  // namespace pvpir::adversary
