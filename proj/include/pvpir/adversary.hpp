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

#ifndef PVPIR_ADVERSARY_HPP_
#define PVPIR_ADVERSARY_HPP_

#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "pvpir/bigint.hpp"
#include "pvpir/database.hpp"
#include "pvpir/errors.hpp"
#include "pvpir/field_group.hpp"
#include "pvpir/fss.hpp"
#include "pvpir/pvpir.hpp"
#include "pvpir/rng.hpp"
#include "pvpir/wire.hpp"

namespace pvpir::adversary {

enum class TamperKind { kHonest, kAdditiveOffset, kRandomReplace, kSwapComponents };

inline std::string_view tamper_name(TamperKind kind) {
  switch (kind) {
    case TamperKind::kHonest: return "honest";
    case TamperKind::kAdditiveOffset: return "additive";
    case TamperKind::kRandomReplace: return "replace";
    case TamperKind::kSwapComponents: return "swap";
  }
  return "unknown";
}

inline std::optional<TamperKind> parse_tamper(std::string_view name) {
  for (auto k : {TamperKind::kHonest, TamperKind::kAdditiveOffset, TamperKind::kRandomReplace,
                 TamperKind::kSwapComponents}) {
    if (tamper_name(k) == name) return k;
  }
  return std::nullopt;
}

// How corrupted servers rewrite their answers. For the DL schemes an
// additive offset moves (a, a') by (delta, delta') in Z_q. For RSA it adds
// delta to a over Z and multiplies a' by a unit u = delta'. Unset offsets
// are drawn per trial: delta uniform nonzero, delta' uniform.
struct TamperStrategy {
  TamperKind kind = TamperKind::kHonest;
  std::set<std::size_t> targets;  // 1-based server indices
  std::optional<BigInt> delta;
  std::optional<BigInt> delta_prime;

  static TamperStrategy honest() { return {}; }
  static TamperStrategy additive(std::set<std::size_t> targets,
                                 std::optional<BigInt> delta = std::nullopt,
                                 std::optional<BigInt> delta_prime = std::nullopt) {
    return {TamperKind::kAdditiveOffset, std::move(targets), std::move(delta),
            std::move(delta_prime)};
  }
  static TamperStrategy replace(std::set<std::size_t> targets) {
    return {TamperKind::kRandomReplace, std::move(targets), std::nullopt, std::nullopt};
  }
  static TamperStrategy swap(std::set<std::size_t> targets) {
    return {TamperKind::kSwapComponents, std::move(targets), std::nullopt, std::nullopt};
  }

  void validate(std::size_t k) const {
    if (kind == TamperKind::kHonest && !targets.empty()) {
      throw InvalidArgument("honest strategy with corrupted servers");
    }
    if (kind != TamperKind::kHonest && targets.empty()) {
      throw InvalidArgument("tamper strategy without targets");
    }
    if (targets.size() > k - 1) throw InvalidArgument("at most k - 1 servers may be corrupted");
    for (std::size_t t : targets) {
      if (t < 1 || t > k) throw InvalidArgument("target outside [1, k]");
    }
  }
};

// Rewrites one answer in place.
inline void apply_tamper(const TamperStrategy& s, AnswerPair& ans, const PublicKey& pk, Rng& rng) {
  const std::size_t lanes = ans.a.size();
  const bool rsa = pk.is_rsa() && is_verifiable(ans.scheme);
  const BigInt& modulus = pk.is_rsa() ? pk.rsa().n : pk.group().q;
  auto nonzero = [&]() -> BigInt { return 1 + rng.below(modulus - 1); };
  auto random_unit = [&] {
    for (;;) {
      BigInt u = nonzero();
      if (gcd(u, modulus) == 1) return u;
    }
  };
  switch (s.kind) {
    case TamperKind::kHonest:
      return;
    case TamperKind::kAdditiveOffset:
      for (std::size_t l = 0; l < lanes; ++l) {
        const BigInt delta = s.delta ? *s.delta : nonzero();
        ans.a[l] = pk.share_group().reduce(ans.a[l] + delta);
        if (!is_verifiable(ans.scheme)) continue;
        if (rsa) {
          const BigInt u = s.delta_prime ? *s.delta_prime : random_unit();
          ans.a_prime[l] = ans.a_prime[l] * u % modulus;
        } else {
          const BigInt dp = s.delta_prime ? *s.delta_prime : rng.below(modulus);
          ans.a_prime[l] = (ans.a_prime[l] + dp) % modulus;
        }
      }
      return;
    case TamperKind::kRandomReplace:
      for (std::size_t l = 0; l < lanes; ++l) {
        ans.a[l] = rng.below(modulus);
        if (is_verifiable(ans.scheme)) ans.a_prime[l] = rsa ? nonzero() : rng.below(modulus);
      }
      return;
    case TamperKind::kSwapComponents:
      if (!is_verifiable(ans.scheme)) return;
      for (std::size_t l = 0; l < lanes; ++l) {
        BigInt a = ans.a[l];
        ans.a[l] = pk.share_group().reduce(ans.a_prime[l]);
        ans.a_prime[l] = rsa ? BigInt(((a % modulus) + modulus) % modulus) : a;
      }
      return;
  }
}

struct ExpConfig {
  std::size_t n = 16;  // database size
  std::size_t k = 2;
  TamperStrategy strategy;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::ostream* records = nullptr;  // JSON lines, one per trial
  bool record_transcripts = false;
};

struct ExpResult {
  std::size_t trials = 0;
  std::size_t accepted = 0;
  std::size_t accepted_wrong = 0;
  std::size_t extraction_checks = 0;    // accepted tampered trials examined
  std::size_t extraction_failures = 0;  // must stay zero

  double rate() const { return trials == 0 ? 0 : static_cast<double>(accepted_wrong) / trials; }
  double accept_rate() const { return trials == 0 ? 0 : static_cast<double>(accepted) / trials; }
};

namespace detail {

// Random single-lane database and a random query function for the scheme.
inline QueryPlan random_instance(const SchemeKeys& keys, std::size_t n, Rng& rng,
                                 DatabaseView& db_out) {
  const std::size_t lane_bits = keys.pk.max_lane_bits();
  LaneMatrix items{n, 1, std::vector<std::uint64_t>(n)};
  for (auto& v : items.values) v = rng.uniform(std::uint64_t{1} << lane_bits);
  db_out = DatabaseView::self_weighted(std::move(items), lane_bits);
  if (keys.scheme == SchemeId::kDlPoint) {
    return point_query_build(db_out, 1 + rng.uniform(n), keys.pk.share_group());
  }
  std::vector<BigInt> values(n);
  for (auto& v : values) v = rng.uniform(2);
  return {fss::FunctionDescription::vector(std::move(values), keys.pk.share_group()),
          db_out.weights()};
}

inline std::string hex_frame(SchemeId scheme, wire::MsgType type, Bytes payload) {
  return to_hex(wire::encode_frame(
      {wire::kVersion, static_cast<std::uint8_t>(scheme), type, std::move(payload)}));
}

// On acceptance of a tampered transcript the offsets must satisfy the
// extraction relation: dtau = alpha * dm (mod q) for DL, and
// xi^dm = (tau'/tau)^e (mod n) for RSA.
inline bool extraction_holds(const SchemeKeys& keys, const QueryBundle& bundle,
                             const Aggregate& honest, const Aggregate& seen) {
  for (std::size_t l = 0; l < honest.m.size(); ++l) {
    if (keys.pk.is_rsa()) {
      const BigInt& n = keys.pk.rsa().n;
      const BigInt dm = seen.m[l] - honest.m[l];
      const BigInt ratio = seen.tau[l] * mod_inverse(honest.tau[l], n) % n;
      if (pow_mod(keys.pk.xi(), dm, n) != pow_mod(ratio, keys.pk.rsa().e, n)) return false;
    } else {
      const BigInt& q = keys.pk.group().q;
      BigInt dm = seen.m[l] - honest.m[l];
      BigInt dtau = seen.tau[l] - honest.tau[l];
      if (((dtau - bundle.alpha * dm) % q) != 0) return false;
    }
  }
  return true;
}

}  // namespace detail

// The verifiability experiment: honest setup, honest answers from servers
// outside T, tampered answers from T, then the public check against the
// brute-force oracle.
inline ExpResult run_exp_ver(const SchemeKeys& keys, const ExpConfig& config) {
  config.strategy.validate(config.k);
  if (config.n == 0) throw InvalidArgument("empty database");
  ExpResult result;
  const Rng master = Rng::from_seed(config.seed);
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    Rng rng = master.derive(trial);
    DatabaseView db = DatabaseView::from_values({0});
    QueryPlan plan = detail::random_instance(keys, config.n, rng, db);
    const std::vector<BigInt> oracle = evaluate_in_clear(plan.f, plan.weights);
    QueryBundle bundle = query(keys, plan.f, config.k, rng);

    std::vector<AnswerPair> honest;
    for (const auto& share : bundle.shares) honest.push_back(answer(keys.pk, db, share));
    std::vector<AnswerPair> seen = honest;
    for (std::size_t t : config.strategy.targets) {
      apply_tamper(config.strategy, seen[t - 1], keys.pk, rng);
    }
    Outcome out = reconstruct(seen, keys.pk, bundle.vk);
    const bool wrong = out.accepted() && out.values() != oracle;
    ++result.trials;
    if (out.accepted()) ++result.accepted;
    if (wrong) ++result.accepted_wrong;
    if (out.accepted() && seen != honest && is_verifiable(keys.scheme)) {
      ++result.extraction_checks;
      if (!detail::extraction_holds(keys, bundle, aggregate(honest, keys.pk),
                                    aggregate(seen, keys.pk))) {
        ++result.extraction_failures;
      }
    }

    if (config.records != nullptr) {
      nlohmann::json rec = {
          {"scheme", scheme_name(keys.scheme)},
          {"trial", trial},
          {"k", config.k},
          {"n", config.n},
          {"targets", std::vector<std::size_t>(config.strategy.targets.begin(),
                                               config.strategy.targets.end())},
          {"strategy", tamper_name(config.strategy.kind)},
          {"accepted", out.accepted()},
          {"outcome", wrong ? 1 : 0},
      };
      if (config.record_transcripts) {
        nlohmann::json queries = nlohmann::json::array();
        nlohmann::json answers = nlohmann::json::array();
        for (const auto& share : bundle.shares) {
          queries.push_back(detail::hex_frame(keys.scheme, wire::MsgType::kQuery,
                                              wire::encode_query_share(share)));
        }
        for (const auto& ans : seen) {
          answers.push_back(detail::hex_frame(keys.scheme, wire::MsgType::kAnswer,
                                              wire::encode_answer(ans, keys.pk)));
        }
        rec["transcript"] = {{"queries", queries}, {"answers", answers}};
      }
      *config.records << rec.dump() << '\n';
    }
  }
  return result;
}

struct SelectiveFailureResult {
  std::size_t trials = 0;  // per function
  std::size_t accepts[2] = {0, 0};

  double frequency(int i) const {
    return trials == 0 ? 0 : static_cast<double>(accepts[i]) / static_cast<double>(trials);
  }
  // Two-proportion z statistic; zero when the pooled rate is degenerate.
  double z() const {
    const double n = static_cast<double>(trials);
    const double pooled = (accepts[0] + accepts[1]) / (2 * n);
    if (pooled <= 0 || pooled >= 1) return 0;
    return (frequency(0) - frequency(1)) / std::sqrt(pooled * (1 - pooled) * (2 / n));
  }
};

// Accept-bit frequencies of one fixed strategy against two queried
// functions over the same database.
inline SelectiveFailureResult run_selective_failure_probe(
    const SchemeKeys& keys, const DatabaseView& db, const TamperStrategy& strategy,
    const fss::FunctionDescription& f0, const fss::FunctionDescription& f1, std::size_t k,
    std::size_t trials, std::uint64_t seed) {
  strategy.validate(k);
  if (f0.domain_size() != f1.domain_size() || !(f0.group() == f1.group())) {
    throw InvalidArgument("probe functions must share domain and output group");
  }
  SelectiveFailureResult result;
  result.trials = trials;
  const Rng master = Rng::from_seed(seed);
  for (int which = 0; which < 2; ++which) {
    const auto& f = which == 0 ? f0 : f1;
    for (std::size_t trial = 0; trial < trials; ++trial) {
      Rng rng = master.derive(2 * trial + static_cast<std::uint64_t>(which));
      QueryBundle bundle = query(keys, f, k, rng);
      std::vector<AnswerPair> answers;
      for (const auto& share : bundle.shares) answers.push_back(answer(keys.pk, db, share));
      for (std::size_t t : strategy.targets) apply_tamper(strategy, answers[t - 1], keys.pk, rng);
      if (reconstruct(answers, keys.pk, bundle.vk).accepted()) ++result.accepts[which];
    }
  }
  return result;
}

struct DistinguishResult {
  double statistic = 0;
  std::size_t degrees_of_freedom = 0;
  double p_value = 1;
};

// Chi-square homogeneity test between the marginal distributions of one key
// component of party 1 when sharing f0 versus f1 with the vector variant.
inline DistinguishResult fss_distinguish_probe(const fss::FunctionDescription& f0,
                                               const fss::FunctionDescription& f1, std::size_t k,
                                               std::size_t trials, std::uint64_t component,
                                               std::uint64_t seed) {
  if (!f0.group().is_modular() || !(f0.group() == f1.group())) {
    throw InvalidArgument("probe needs one modular output group");
  }
  if (component < 1 || component > f0.domain_size() || f0.domain_size() != f1.domain_size()) {
    throw InvalidArgument("component outside the domain");
  }
  const BigInt& q = f0.group().modulus();
  const std::size_t bins = q <= 64 ? static_cast<std::size_t>(q.get_ui()) : 64;
  std::vector<double> counts[2] = {std::vector<double>(bins, 0), std::vector<double>(bins, 0)};
  Rng rng = Rng::from_seed(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    for (int which = 0; which < 2; ++which) {
      auto keys = fss::fss_gen(fss::kDefaultSecurityBits, which == 0 ? f0 : f1, k, rng,
                               fss::Variant::kVector);
      const BigInt& v = std::get<fss::VectorKey>(keys[0].body).values[component - 1];
      BigInt bin = v * bins / q;
      counts[which][bin.get_ui()] += 1;
    }
  }
  DistinguishResult out;
  std::size_t used = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double pooled = (counts[0][b] + counts[1][b]) / 2;
    if (pooled == 0) continue;
    ++used;
    for (int which = 0; which < 2; ++which) {
      const double d = counts[which][b] - pooled;
      out.statistic += d * d / pooled;
    }
  }
  out.degrees_of_freedom = used > 1 ? used - 1 : 1;
  boost::math::chi_squared dist(static_cast<double>(out.degrees_of_freedom));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

}  // namespace pvpir::adversary

#endif  // PVPIR_ADVERSARY_HPP_
