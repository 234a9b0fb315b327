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

#include "pvpir/bench.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>

namespace pvpir::bench {
namespace {

const DlGroup kToyGroup{23, 11, 4};

SchemeKeys toy_keys(SchemeId scheme) {
  Rng rng = Rng::from_seed(3);
  return keygen(scheme, Profile::kToy, rng);
}

TEST(CsvTest, HeaderMatchesRecordFields) {
  std::ostringstream out;
  write_csv(out, {{"pi1", 1024, 2, 0.5, 0.25, 0.125, 100, 20, 7}});
  EXPECT_EQ(out.str(),
            "scheme,N,k,user_time_query,user_time_reconstruct,server_time,upload_bytes,"
            "download_bytes,trial\npi1,1024,2,0.5,0.25,0.125,100,20,7\n");
}

TEST(MerkleTest, Formula) {
  EXPECT_DOUBLE_EQ(merkle_baseline_bytes(1024), 32.0 * 10 * 32);
  EXPECT_DOUBLE_EQ(merkle_baseline_bytes(1 << 20), 1024.0 * 20 * 32);
  double prev = 0;
  for (std::uint64_t n = 2; n < (1u << 24); n *= 2) {
    EXPECT_GT(merkle_baseline_bytes(n), prev);
    prev = merkle_baseline_bytes(n);
  }
}

TEST(OverheadTest, ToyRatiosFiniteAndRecordsComplete) {
  for (auto scheme : {SchemeId::kDlPredicate, SchemeId::kRsaPredicate}) {
    BenchConfig config;
    config.trials = 4;
    auto report = bench_relative_overhead(toy_keys(scheme), {1 << 8, 1 << 10}, config);
    ASSERT_EQ(report.summary.size(), 2u);
    EXPECT_EQ(report.records.size(), 2u * 2 * 4);
    for (const auto& s : report.summary) {
      EXPECT_TRUE(std::isfinite(s.user_ratio()));
      EXPECT_TRUE(std::isfinite(s.server_ratio()));
      EXPECT_GT(s.user_ratio(), 0);
    }
    for (const auto& r : report.records) {
      EXPECT_GE(r.user_time_query, 0);
      EXPECT_GE(r.server_time, 0);
      EXPECT_GT(r.upload_bytes, 0u);
    }
  }
  EXPECT_THROW(bench_relative_overhead(toy_keys(SchemeId::kDlPoint), {16}, {}), InvalidArgument);
}

TEST(OverheadTest, MemoryCapSkips) {
  BenchConfig config;
  config.trials = 1;
  config.max_bytes = 1000;
  auto report = bench_relative_overhead(toy_keys(SchemeId::kDlPredicate), {1 << 12}, config);
  EXPECT_TRUE(report.summary.empty());
  EXPECT_EQ(report.skipped, std::vector<std::uint64_t>{1 << 12});
}

TEST(BandwidthTest, DownloadConstantUploadGrows) {
  BenchConfig config;
  config.trials = 2;
  auto report = bench_bandwidth(toy_keys(SchemeId::kDlPoint), {1 << 6, 1 << 12}, 256, config);
  ASSERT_EQ(report.rows.size(), 2u);
  EXPECT_TRUE(bandwidth_claims_hold(report));
  // Two servers, each sent a payload key and a verification key; every key
  // grows 17 bytes per tree level.
  EXPECT_EQ(report.rows[1].upload_bytes - report.rows[0].upload_bytes, 2u * 2 * 17 * 6);
}

TEST(PointTimeTest, VerifiedNotCheaper) {
  BenchConfig config;
  config.trials = 3;
  auto report = bench_point_time(toy_keys(SchemeId::kDlPoint), {1 << 12, 1 << 14}, config);
  ASSERT_EQ(report.summary.size(), 2u);
  for (const auto& s : report.summary) {
    EXPECT_GT(s.plain_total, 0);
    EXPECT_TRUE(std::isfinite(s.overhead_ratio()));
  }
  EXPECT_EQ(report.records.size(), 2u * 2 * 3);
}

TEST(PointTimeTest, SlopeOfExactPowerLaw) {
  PointTimeReport r;
  r.summary = {{1024, 0, 0, 0.001}, {2048, 0, 0, 0.002}, {4096, 0, 0, 0.004}};
  EXPECT_NEAR(r.plain_server_slope(), 1.0, 1e-12);
}

}  // namespace
}  // namespace pvpir::bench
