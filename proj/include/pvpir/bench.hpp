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

#ifndef PVPIR_BENCH_HPP_
#define PVPIR_BENCH_HPP_

#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "pvpir/database.hpp"
#include "pvpir/errors.hpp"
#include "pvpir/pvpir.hpp"
#include "pvpir/rng.hpp"
#include "pvpir/transport.hpp"

namespace pvpir::bench {

// One measured query.
struct BenchRecord {
  std::string scheme;
  std::uint64_t n = 0;
  std::size_t k = 0;
  double user_time_query = 0;
  double user_time_reconstruct = 0;
  double server_time = 0;
  std::uint64_t upload_bytes = 0;
  std::uint64_t download_bytes = 0;
  std::size_t trial = 0;

  double user_time() const { return user_time_query + user_time_reconstruct; }
};

inline constexpr std::string_view kCsvHeader =
    "scheme,N,k,user_time_query,user_time_reconstruct,server_time,upload_bytes,download_bytes,"
    "trial";

inline void write_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.scheme << ',' << r.n << ',' << r.k << ',' << r.user_time_query << ','
        << r.user_time_reconstruct << ',' << r.server_time << ',' << r.upload_bytes << ','
        << r.download_bytes << ',' << r.trial << '\n';
  }
}

struct BenchConfig {
  std::size_t k = 2;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  std::uint64_t max_bytes = std::uint64_t{3} << 30;  // skip sizes estimated above this
};

namespace detail {

inline BenchRecord to_record(SchemeId scheme, std::uint64_t n, std::size_t k, std::size_t trial,
                             const transport::ClientStats& s) {
  return {std::string(scheme_name(scheme)), n, k, s.query_seconds, s.reconstruct_seconds,
          s.mean_server_seconds(), s.upload_bytes, s.download_bytes, trial};
}

inline LaneMatrix random_lanes(std::size_t rows, std::size_t lanes, std::size_t lane_bits,
                               Rng& rng) {
  LaneMatrix m{rows, lanes, std::vector<std::uint64_t>(rows * lanes)};
  const std::uint64_t mask = (std::uint64_t{1} << lane_bits) - 1;
  for (auto& v : m.values) v = rng.next_u64() & mask;
  return m;
}

// Loopback servers over one shared database, one per party.
struct LoopbackSet {
  std::vector<std::unique_ptr<transport::LoopbackEndpoint>> owned;
  std::vector<transport::Endpoint*> endpoints;

  LoopbackSet(const PublicKey& pk, const DatabaseView& db, std::size_t k) {
    auto core = std::make_shared<const transport::ServerCore>(
        wire::KeyRing::of(pk), db,
        std::set<SchemeId>{SchemeId::kPlainFssPir, SchemeId::kDlPredicate, SchemeId::kRsaPredicate,
                           SchemeId::kDlPoint});
    for (std::size_t j = 0; j < k; ++j) {
      owned.push_back(
          std::make_unique<transport::LoopbackEndpoint>(core, "server" + std::to_string(j + 1)));
      endpoints.push_back(owned.back().get());
    }
  }
};

inline transport::ClientResult checked_query(LoopbackSet& servers, const SchemeKeys& keys,
                                             const QueryPlan& plan, Rng& rng) {
  auto result = transport::run_client(servers.endpoints, keys, plan.f, rng, {},
                                      transport::FanOut::kSequential);
  if (!result.outcome.accepted()) throw Error("honest benchmark query rejected");
  if (result.outcome.values() != evaluate_in_clear(plan.f, plan.weights)) {
    throw Error("benchmark query returned a wrong value");
  }
  return result;
}

inline double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0;
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace detail

// Rough peak footprint of one query: the lane matrix plus k vector keys
// for the payload and the verification function, encoded and decoded.
inline std::uint64_t estimate_bytes(std::uint64_t n, std::size_t lanes, const PublicKey& pk,
                                    std::size_t k, bool vector_keys) {
  std::uint64_t per_row = 8 * lanes;
  if (vector_keys) {
    const std::uint64_t element = bit_length(pk.modulus()) / 8 + 16 + 24;
    per_row += 2 * (k + 2) * element;
  }
  return n * per_row;
}

struct OverheadSummary {
  std::uint64_t n = 0;
  double verified_user = 0;
  double plain_user = 0;
  double verified_server = 0;
  double plain_server = 0;

  double user_ratio() const { return plain_user > 0 ? verified_user / plain_user : 0; }
  double server_ratio() const { return plain_server > 0 ? verified_server / plain_server : 0; }
};

struct OverheadReport {
  std::vector<BenchRecord> records;
  std::vector<OverheadSummary> summary;
  std::vector<std::uint64_t> skipped;  // sizes over the memory cap
};

inline void write_overhead_summary(std::ostream& out, const OverheadReport& report) {
  out << "N,verified_user,plain_user,verified_server,plain_server,user_ratio,server_ratio\n";
  for (const auto& s : report.summary) {
    out << s.n << ',' << s.verified_user << ',' << s.plain_user << ',' << s.verified_server << ','
        << s.plain_server << ',' << s.user_ratio() << ',' << s.server_ratio() << '\n';
  }
}

// Verified vs plain on random threshold-sum queries over single-lane items.
// The two modes alternate within each trial.
inline OverheadReport bench_relative_overhead(const SchemeKeys& keys,
                                              const std::vector<std::uint64_t>& sizes,
                                              const BenchConfig& config) {
  if (keys.scheme != SchemeId::kDlPredicate && keys.scheme != SchemeId::kRsaPredicate) {
    throw InvalidArgument("overhead benchmark runs the predicate schemes");
  }
  OverheadReport report;
  const SchemeKeys plain = keys.as_plain();
  const std::size_t lane_bits = keys.pk.max_lane_bits();
  Rng rng = Rng::from_seed(config.seed);
  for (std::uint64_t n : sizes) {
    if (estimate_bytes(n, 1, keys.pk, config.k, true) > config.max_bytes) {
      report.skipped.push_back(n);
      continue;
    }
    DatabaseView db = DatabaseView::self_weighted(detail::random_lanes(n, 1, lane_bits, rng),
                                                  lane_bits);
    detail::LoopbackSet servers(keys.pk, db, config.k);
    std::vector<double> vu, pu, vs, ps;
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      const std::uint64_t threshold = rng.uniform(std::uint64_t{1} << lane_bits);
      auto below = [threshold](std::span<const std::uint64_t> item) {
        return BigInt(item[0] < threshold ? 1 : 0);
      };
      for (const SchemeKeys* mode : {&keys, &plain}) {
        QueryPlan plan =
            predicate_query_build(db, below, Aggregation::kSum, mode->pk.share_group());
        auto result = detail::checked_query(servers, *mode, plan, rng);
        BenchRecord rec = detail::to_record(mode->scheme, n, config.k, trial, result.stats);
        (mode == &keys ? vu : pu).push_back(rec.user_time());
        (mode == &keys ? vs : ps).push_back(rec.server_time);
        report.records.push_back(std::move(rec));
      }
    }
    report.summary.push_back(
        {n, detail::mean(vu), detail::mean(pu), detail::mean(vs), detail::mean(ps)});
  }
  return report;
}

// Analytic proof size of a Merkle-tree verified PIR, c * sqrt(N) * log2(N)
// * hash bytes with c = 1 and 32-byte hashes.
inline double merkle_baseline_bytes(std::uint64_t n) {
  const double nd = static_cast<double>(n);
  return std::sqrt(nd) * std::log2(nd) * 32.0;
}

struct BandwidthRow {
  std::uint64_t n = 0;
  std::uint64_t upload_bytes = 0;    // total over servers, one query
  std::uint64_t download_bytes = 0;  // total over servers, one query
  double merkle_bytes = 0;
};

struct BandwidthReport {
  std::vector<BenchRecord> records;
  std::vector<BandwidthRow> rows;
  std::vector<std::uint64_t> skipped;
};

inline void write_bandwidth_rows(std::ostream& out, const BandwidthReport& report) {
  out << "N,upload_bytes,download_bytes,merkle_bytes\n";
  for (const auto& r : report.rows) {
    out << r.n << ',' << r.upload_bytes << ',' << r.download_bytes << ',' << r.merkle_bytes
        << '\n';
  }
}

// Download identical at every size; upload and the Merkle column strictly
// increasing.
inline bool bandwidth_claims_hold(const BandwidthReport& report) {
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].download_bytes != report.rows[0].download_bytes) return false;
    if (report.rows[i].upload_bytes <= report.rows[i - 1].upload_bytes) return false;
    if (report.rows[i].merkle_bytes <= report.rows[i - 1].merkle_bytes) return false;
  }
  return true;
}

// Exact wire bytes of point queries for items of item_bytes bytes.
inline BandwidthReport bench_bandwidth(const SchemeKeys& keys,
                                       const std::vector<std::uint64_t>& sizes,
                                       std::size_t item_bytes, const BenchConfig& config) {
  if (keys.scheme != SchemeId::kDlPoint) throw InvalidArgument("bandwidth benchmark runs pi3");
  BandwidthReport report;
  const std::size_t lane_bits = keys.pk.max_lane_bits();
  const std::size_t lanes = lane_count(item_bytes * 8, lane_bits);
  Rng rng = Rng::from_seed(config.seed);
  for (std::uint64_t n : sizes) {
    if (estimate_bytes(n, lanes, keys.pk, config.k, config.k != 2) > config.max_bytes) {
      report.skipped.push_back(n);
      continue;
    }
    DatabaseView db = DatabaseView::self_weighted(
        detail::random_lanes(n, lanes, lane_bits, rng), lane_bits, item_bytes);
    detail::LoopbackSet servers(keys.pk, db, config.k);
    BandwidthRow row{n, 0, 0, merkle_baseline_bytes(n)};
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      QueryPlan plan = point_query_build(db, 1 + rng.uniform(n), keys.pk.share_group());
      auto result = detail::checked_query(servers, keys, plan, rng);
      report.records.push_back(detail::to_record(keys.scheme, n, config.k, trial, result.stats));
      if (trial == 0) {
        row.upload_bytes = result.stats.upload_bytes;
        row.download_bytes = result.stats.download_bytes;
      } else if (row.upload_bytes != result.stats.upload_bytes ||
                 row.download_bytes != result.stats.download_bytes) {
        throw Error("query size varies within one database size");
      }
    }
    report.rows.push_back(row);
  }
  return report;
}

struct PointTimeSummary {
  std::uint64_t n = 0;
  double verified_total = 0;  // user time plus mean server time
  double plain_total = 0;
  double plain_server = 0;

  double overhead_ratio() const { return plain_total > 0 ? verified_total / plain_total : 0; }
  double additive_overhead() const { return verified_total - plain_total; }
};

struct PointTimeReport {
  std::vector<BenchRecord> records;
  std::vector<PointTimeSummary> summary;
  std::vector<std::uint64_t> skipped;

  // Least-squares slope of log(plain server time) against log(N).
  double plain_server_slope() const {
    const std::size_t m = summary.size();
    if (m < 2) return 0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& s : summary) {
      const double x = std::log2(static_cast<double>(s.n));
      const double y = std::log2(s.plain_server);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double md = static_cast<double>(m);
    return (md * sxy - sx * sy) / (md * sxx - sx * sx);
  }
};

inline void write_point_time_summary(std::ostream& out, const PointTimeReport& report) {
  out << "N,verified_total,plain_total,plain_server,overhead_ratio,additive_overhead\n";
  for (const auto& s : report.summary) {
    out << s.n << ',' << s.verified_total << ',' << s.plain_total << ',' << s.plain_server << ','
        << s.overhead_ratio() << ',' << s.additive_overhead() << '\n';
  }
}

// Verified point queries against plain DPF-PIR on single-lane items.
inline PointTimeReport bench_point_time(const SchemeKeys& keys,
                                        const std::vector<std::uint64_t>& sizes,
                                        const BenchConfig& config) {
  if (keys.scheme != SchemeId::kDlPoint) throw InvalidArgument("point benchmark runs pi3");
  PointTimeReport report;
  const SchemeKeys plain = keys.as_plain();
  const std::size_t lane_bits = keys.pk.max_lane_bits();
  Rng rng = Rng::from_seed(config.seed);
  for (std::uint64_t n : sizes) {
    if (estimate_bytes(n, 1, keys.pk, config.k, config.k != 2) > config.max_bytes) {
      report.skipped.push_back(n);
      continue;
    }
    DatabaseView db = DatabaseView::self_weighted(detail::random_lanes(n, 1, lane_bits, rng),
                                                  lane_bits);
    detail::LoopbackSet servers(keys.pk, db, config.k);
    std::vector<double> vt, pt, psrv;
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      const std::uint64_t iota = 1 + rng.uniform(n);
      for (const SchemeKeys* mode : {&keys, &plain}) {
        QueryPlan plan = point_query_build(db, iota, mode->pk.share_group());
        auto result = detail::checked_query(servers, *mode, plan, rng);
        BenchRecord rec = detail::to_record(mode->scheme, n, config.k, trial, result.stats);
        (mode == &keys ? vt : pt).push_back(rec.user_time() + rec.server_time);
        if (mode == &plain) psrv.push_back(rec.server_time);
        report.records.push_back(std::move(rec));
      }
    }
    report.summary.push_back({n, detail::mean(vt), detail::mean(pt), detail::mean(psrv)});
  }
  return report;
}

}  // namespace pvpir::bench

#endif  // PVPIR_BENCH_HPP_
