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

// pvpir: key generation, database synthesis, servers, queries, the
// verification experiments and the benchmarks.

#include "CLI11.hpp"

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pvpir/adversary.hpp"
#include "pvpir/bench.hpp"
#include "pvpir/database.hpp"
#include "pvpir/pvpir.hpp"
#include "pvpir/rng.hpp"
#include "pvpir/transport.hpp"
#include "pvpir/wire.hpp"

namespace {

using namespace pvpir;  // NOLINT(build/namespaces)

constexpr int kExitOk = 0;
constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;
constexpr int kExitError = 3;

const std::vector<std::string> kSchemeNames = {"plain", "pi1", "pi2", "pi3"};
const std::vector<std::string> kProfileNames = {"toy", "paper"};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Accepts "1024" or "2^10".
std::uint64_t parse_size(const std::string& text) {
  auto parse = [&](std::string_view s) {
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) throw UsageError("bad size: " + text);
    return v;
  };
  const auto caret = text.find('^');
  if (caret == std::string::npos) return parse(text);
  const std::uint64_t base = parse(std::string_view(text).substr(0, caret));
  const std::uint64_t exp = parse(std::string_view(text).substr(caret + 1));
  std::uint64_t v = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (v > UINT64_MAX / std::max<std::uint64_t>(base, 1)) throw UsageError("size overflow");
    v *= base;
  }
  return v;
}

std::vector<std::uint64_t> parse_sizes(const std::vector<std::string>& texts) {
  std::vector<std::uint64_t> out;
  for (const auto& t : texts) out.push_back(parse_size(t));
  return out;
}

std::set<std::size_t> to_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

SchemeId scheme_of(const std::string& name) { return *parse_scheme(name); }
Profile profile_of(const std::string& name) { return *parse_profile(name); }

// Keys for the experiments: the named profile, an explicit bit size, or the
// calibration parameters (q = 11 group, n = 55 RSA key).
SchemeKeys experiment_keys(SchemeId scheme, const std::string& profile, std::size_t bits,
                           bool calibration, Rng& rng) {
  if (calibration) {
    if (uses_rsa(scheme)) return keys_from_rsa(RsaKeyPair::from_parts(5, 11, 3, 2));
    return keys_from_group(scheme, DlGroup{23, 11, 4});
  }
  if (bits != 0) return keygen_bits(scheme, bits, rng);
  return keygen(scheme, profile_of(profile), rng);
}

adversary::TamperStrategy make_strategy(const std::string& kind, const std::set<std::size_t>& targets,
                                        const std::optional<std::string>& delta,
                                        const std::optional<std::string>& delta_prime) {
  auto parsed = adversary::parse_tamper(kind);
  if (!parsed) throw UsageError("unknown strategy: " + kind);
  adversary::TamperStrategy s{*parsed, targets, std::nullopt, std::nullopt};
  if (delta) s.delta = BigInt(*delta);
  if (delta_prime) s.delta_prime = BigInt(*delta_prime);
  return s;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

// --- keygen ---------------------------------------------------------------

struct KeygenArgs {
  std::string scheme = "pi3";
  std::string profile = "toy";
  std::size_t bits = 0;
  std::uint64_t seed = 0;
  bool seeded = false;
  std::string pk_path = "pk.bin";
  std::string sk_path = "sk.bin";
};

int run_keygen(const KeygenArgs& a) {
  Rng rng = a.seeded ? Rng::from_seed(a.seed) : Rng::from_os();
  const SchemeId scheme = scheme_of(a.scheme);
  SchemeKeys keys = a.bits != 0 ? keygen_bits(scheme, a.bits, rng)
                                : keygen(scheme, profile_of(a.profile), rng);
  wire::files::write(a.pk_path, wire::files::kPublicKeyMagic, wire::encode_public_key(keys.pk));
  wire::files::write(a.sk_path, wire::files::kSecretKeyMagic, wire::encode_scheme_keys(keys));
  std::cout << "scheme " << scheme_name(scheme) << ", modulus " << bit_length(keys.pk.modulus())
            << " bits, max lane bits " << keys.pk.max_lane_bits() << '\n';
  return kExitOk;
}

// --- mkdb -----------------------------------------------------------------

struct MkdbArgs {
  std::string n = "1024";
  std::size_t item_bytes = 4;
  std::size_t lane_bits = 0;
  std::string pk_path;
  std::string weights = "items";
  std::string out = "db.bin";
  std::string weights_out = "weights.bin";
  std::uint64_t seed = 1;
};

int run_mkdb(const MkdbArgs& a) {
  std::size_t lane_bits = a.lane_bits;
  if (!a.pk_path.empty()) {
    PublicKey pk = wire::decode_public_key(wire::files::read(a.pk_path, wire::files::kPublicKeyMagic));
    if (lane_bits == 0) lane_bits = pk.max_lane_bits();
    if (lane_bits > pk.max_lane_bits()) throw UsageError("lane width too large for this key");
  }
  if (lane_bits == 0) lane_bits = kDefaultLaneBits;
  Rng rng = Rng::from_seed(a.seed);
  dbfile::ItemTable table = dbfile::random_items(parse_size(a.n), a.item_bytes, lane_bits, rng);
  dbfile::detail::write_file(a.out, dbfile::encode_items(table));
  if (a.weights == "ones") {
    dbfile::detail::write_file(a.weights_out, dbfile::encode_weights(LaneMatrix::ones(table.items.size())));
  }
  std::cout << "wrote " << table.items.size() << " items of " << a.item_bytes << " bytes ("
            << lane_count(a.item_bytes * 8, lane_bits) << " lanes of " << lane_bits << " bits)\n";
  return kExitOk;
}

// --- serve ----------------------------------------------------------------

struct ServeArgs {
  std::string listen = "127.0.0.1:7700";
  std::string db;
  std::string weights;
  std::vector<std::string> pks;
  std::vector<std::string> schemes = kSchemeNames;
  std::size_t max_concurrent = 8;
  std::string tamper = "honest";
  std::uint64_t seed = 1;
};

int run_serve(const ServeArgs& a) {
  transport::ServerConfig config;
  config.listen = a.listen;
  config.database = a.db;
  config.weights = a.weights;
  for (const auto& p : a.pks) config.public_keys.emplace_back(p);
  config.allowed.clear();
  for (const auto& s : a.schemes) config.allowed.insert(scheme_of(s));
  config.max_concurrent = a.max_concurrent;
  if (a.tamper != "honest") {
    // A misbehaving server: every answer it sends is tampered.
    auto strategy = make_strategy(a.tamper, {1}, std::nullopt, std::nullopt);
    auto rng = std::make_shared<Rng>(Rng::from_seed(a.seed));
    auto lock = std::make_shared<std::mutex>();
    config.filter = [strategy, rng, lock](AnswerPair& ans, const PublicKey& pk) {
      std::lock_guard guard(*lock);
      adversary::apply_tamper(strategy, ans, pk, *rng);
    };
    std::cerr << "warning: tampering with every answer (" << a.tamper << ")\n";
  }
  std::atomic<bool> stop{false};
  transport::serve(config, stop, [&](std::uint16_t port) {
    std::cout << "listening on port " << port << std::endl;
  });
  return kExitOk;
}

// --- query ----------------------------------------------------------------

struct QueryArgs {
  std::string scheme = "pi3";
  std::string sk_path = "sk.bin";
  std::vector<std::string> servers;
  std::uint64_t index = 0;
  std::vector<std::uint64_t> select;
  std::string range;
  std::uint64_t n = 0;
  std::size_t item_bytes = 0;
  std::size_t lane_bits = 0;
  std::uint64_t seed = 0;
  bool seeded = false;
  std::string vk_out;
  std::string answers_out;
  double timeout_seconds = 30;
};

fss::FunctionDescription query_function(const QueryArgs& a, const SchemeKeys& keys) {
  const auto& group = keys.pk.share_group();
  if (a.n == 0) throw UsageError("--n (database size) is required");
  if (a.index != 0) {
    if (a.index > a.n) throw UsageError("--index outside [1, n]");
    return fss::FunctionDescription::point(a.n, a.index, 1, group);
  }
  if (keys.scheme == SchemeId::kDlPoint) throw UsageError("pi3 needs --index");
  std::vector<BigInt> values(a.n);
  for (std::uint64_t i : a.select) {
    if (i < 1 || i > a.n) throw UsageError("--select index outside [1, n]");
    values[i - 1] = 1;
  }
  if (!a.range.empty()) {
    const auto colon = a.range.find(':');
    if (colon == std::string::npos) throw UsageError("--range must be lo:hi");
    const std::uint64_t lo = parse_size(a.range.substr(0, colon));
    const std::uint64_t hi = parse_size(a.range.substr(colon + 1));
    if (lo < 1 || hi > a.n || lo > hi) throw UsageError("--range outside [1, n]");
    for (std::uint64_t i = lo; i <= hi; ++i) values[i - 1] = 1;
  }
  return fss::FunctionDescription::vector(std::move(values), group);
}

int run_query(const QueryArgs& a) {
  SchemeKeys keys = wire::decode_scheme_keys(wire::files::read(a.sk_path, wire::files::kSecretKeyMagic));
  const SchemeId scheme = scheme_of(a.scheme);
  if (scheme == SchemeId::kPlainFssPir) {
    keys = keys.as_plain();
  } else if (scheme != keys.scheme) {
    throw UsageError("key file belongs to " + std::string(scheme_name(keys.scheme)));
  }
  if (a.servers.size() < 2) throw UsageError("need at least two servers");
  auto f = query_function(a, keys);

  const auto timeout = std::chrono::milliseconds(static_cast<long>(a.timeout_seconds * 1000));
  std::vector<std::unique_ptr<transport::TcpEndpoint>> owned;
  std::vector<transport::Endpoint*> endpoints;
  for (const auto& s : a.servers) {
    owned.push_back(std::make_unique<transport::TcpEndpoint>(transport::parse_endpoint(s), timeout));
    endpoints.push_back(owned.back().get());
  }
  Rng rng = a.seeded ? Rng::from_seed(a.seed) : Rng::from_os();
  transport::ClientResult result = transport::run_client(endpoints, keys, f, rng);

  if (!a.vk_out.empty() && result.vk) {
    wire::files::write(a.vk_out, wire::files::kVerificationKeyMagic,
                       wire::encode_verification_key(*result.vk));
  }
  if (!a.answers_out.empty()) {
    wire::files::write(a.answers_out, wire::files::kAnswerMagic,
                       transport::encode_answer_set(result.answers, keys.pk));
  }
  std::cerr << "upload " << result.stats.upload_bytes << " B, download "
            << result.stats.download_bytes << " B\n";
  if (!result.outcome.accepted()) {
    std::cout << "REJECT\n";
    return kExitReject;
  }
  const auto& values = result.outcome.values();
  if (a.item_bytes != 0) {
    const std::size_t lane_bits = a.lane_bits != 0 ? a.lane_bits : keys.pk.max_lane_bits();
    std::vector<std::uint64_t> lanes;
    for (const auto& v : values) {
      if (!v.fits_ulong_p()) throw Error("lane value does not fit an item lane");
      lanes.push_back(v.get_ui());
    }
    std::cout << to_hex(unchunk_item(lanes, lane_bits, a.item_bytes)) << '\n';
  } else {
    for (std::size_t l = 0; l < values.size(); ++l) {
      std::cout << (l ? " " : "") << values[l].get_str();
    }
    std::cout << '\n';
  }
  return kExitOk;
}

// --- verify ---------------------------------------------------------------

struct VerifyArgs {
  std::string pk_path;
  std::string vk_path;
  std::string answers_path;
};

int run_verify(const VerifyArgs& a) {
  PublicKey pk = wire::decode_public_key(wire::files::read(a.pk_path, wire::files::kPublicKeyMagic));
  VerificationKey vk = wire::decode_verification_key(
      wire::files::read(a.vk_path, wire::files::kVerificationKeyMagic));
  auto answers = transport::decode_answer_set(
      wire::files::read(a.answers_path, wire::files::kAnswerMagic), pk);
  const bool ok = transport::verify_standalone(answers, pk, vk);
  std::cout << (ok ? "ACCEPT" : "REJECT") << '\n';
  return ok ? kExitOk : kExitReject;
}

// --- exp-ver --------------------------------------------------------------

struct ExperimentArgs {
  std::string scheme = "pi1";
  std::string profile = "toy";
  std::size_t bits = 0;
  bool calibration = false;
  std::string n = "16";
  std::size_t k = 2;
  std::string strategy = "additive";
  std::vector<std::size_t> targets = {1};
  std::optional<std::string> delta;
  std::optional<std::string> delta_prime;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::string out;
  bool transcripts = false;
  std::uint64_t i0 = 1;
  std::uint64_t i1 = 2;
};

int run_exp_ver(const ExperimentArgs& a) {
  Rng rng = Rng::from_seed(a.seed);
  const SchemeId scheme = scheme_of(a.scheme);
  SchemeKeys keys = experiment_keys(scheme == SchemeId::kPlainFssPir ? SchemeId::kDlPredicate : scheme,
                                    a.profile, a.bits, a.calibration, rng);
  if (scheme == SchemeId::kPlainFssPir) keys = keys.as_plain();
  adversary::ExpConfig config;
  config.n = parse_size(a.n);
  config.k = a.k;
  config.trials = a.trials;
  config.seed = a.seed;
  config.strategy = a.strategy == "honest"
                        ? adversary::TamperStrategy::honest()
                        : make_strategy(a.strategy, to_set(a.targets), a.delta, a.delta_prime);
  std::ofstream records;
  if (!a.out.empty()) {
    records = open_out(a.out);
    config.records = &records;
    config.record_transcripts = a.transcripts;
  }
  auto r = adversary::run_exp_ver(keys, config);
  std::cout << "trials " << r.trials << ", accepted " << r.accepted << ", accepted-wrong "
            << r.accepted_wrong << ", rate " << r.rate() << ", extraction failures "
            << r.extraction_failures << '\n';
  return kExitOk;
}

// --- probe-sf -------------------------------------------------------------

int run_probe_sf(const ExperimentArgs& a) {
  Rng rng = Rng::from_seed(a.seed);
  const SchemeId scheme = scheme_of(a.scheme);
  if (!is_verifiable(scheme)) throw UsageError("probe-sf needs a verifiable scheme");
  SchemeKeys keys = experiment_keys(scheme, a.profile, a.bits, a.calibration, rng);
  const std::uint64_t n = parse_size(a.n);
  if (a.i0 < 1 || a.i0 > n || a.i1 < 1 || a.i1 > n) throw UsageError("probe index outside [1, n]");
  LaneMatrix items{n, 1, std::vector<std::uint64_t>(n)};
  for (auto& v : items.values) v = rng.uniform(std::uint64_t{1} << keys.pk.max_lane_bits());
  DatabaseView db = DatabaseView::self_weighted(std::move(items), keys.pk.max_lane_bits());
  const auto& group = keys.pk.share_group();
  auto f0 = fss::FunctionDescription::point(n, a.i0, 1, group);
  auto f1 = fss::FunctionDescription::point(n, a.i1, 1, group);
  auto strategy = a.strategy == "honest"
                      ? adversary::TamperStrategy::honest()
                      : make_strategy(a.strategy, to_set(a.targets), a.delta, a.delta_prime);
  auto r = adversary::run_selective_failure_probe(keys, db, strategy, f0, f1, a.k, a.trials, a.seed);
  std::cout << "freq_f0 " << r.frequency(0) << ", freq_f1 " << r.frequency(1) << ", z " << r.z()
            << '\n';
  return kExitOk;
}

// --- bench ----------------------------------------------------------------

struct BenchArgs {
  std::string kind = "overhead";
  std::string scheme;
  std::string profile = "toy";
  std::vector<std::string> sizes = {"2^10", "2^12"};
  std::size_t k = 2;
  std::size_t trials = 50;
  std::size_t item_bytes = 256;
  std::uint64_t seed = 1;
  std::uint64_t max_bytes = std::uint64_t{3} << 30;
  std::string out;
  std::string summary;
};

int run_bench(const BenchArgs& a) {
  const std::string default_scheme = a.kind == "overhead" ? "pi1" : "pi3";
  const SchemeId scheme = scheme_of(a.scheme.empty() ? default_scheme : a.scheme);
  Rng rng = Rng::from_seed(a.seed);
  SchemeKeys keys = keygen(scheme, profile_of(a.profile), rng);
  bench::BenchConfig config;
  config.k = a.k;
  config.trials = a.trials;
  config.seed = a.seed;
  config.max_bytes = a.max_bytes;
  const auto sizes = parse_sizes(a.sizes);

  std::vector<bench::BenchRecord> records;
  std::vector<std::uint64_t> skipped;
  std::ostringstream summary;
  if (a.kind == "overhead") {
    auto report = bench::bench_relative_overhead(keys, sizes, config);
    bench::write_overhead_summary(summary, report);
    records = std::move(report.records);
    skipped = report.skipped;
  } else if (a.kind == "bandwidth") {
    auto report = bench::bench_bandwidth(keys, sizes, a.item_bytes, config);
    bench::write_bandwidth_rows(summary, report);
    summary << "claims_hold," << (bench::bandwidth_claims_hold(report) ? 1 : 0) << '\n';
    records = std::move(report.records);
    skipped = report.skipped;
  } else {
    auto report = bench::bench_point_time(keys, sizes, config);
    bench::write_point_time_summary(summary, report);
    summary << "plain_server_slope," << report.plain_server_slope() << '\n';
    records = std::move(report.records);
    skipped = report.skipped;
  }
  for (auto n : skipped) std::cerr << "skipped N=" << n << " (over --max-bytes)\n";
  if (a.out.empty()) {
    bench::write_csv(std::cout, records);
  } else {
    auto out = open_out(a.out);
    bench::write_csv(out, records);
  }
  if (a.summary.empty()) {
    std::cerr << summary.str();
  } else {
    open_out(a.summary) << summary.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Publicly verifiable private information retrieval"};
  app.require_subcommand(1);
  int status = kExitOk;
  auto scheme_check = CLI::IsMember(kSchemeNames);
  auto profile_check = CLI::IsMember(kProfileNames);

  KeygenArgs kg;
  auto* keygen_cmd = app.add_subcommand("keygen", "Generate scheme keys");
  keygen_cmd->add_option("--scheme", kg.scheme)->check(scheme_check);
  keygen_cmd->add_option("--profile", kg.profile)->check(profile_check)->envname("PVPIR_PROFILE");
  keygen_cmd->add_option("--bits", kg.bits, "Explicit modulus size");
  keygen_cmd->add_option("--seed", kg.seed);
  keygen_cmd->add_option("--pk", kg.pk_path, "Public key output");
  keygen_cmd->add_option("--sk", kg.sk_path, "Client key output");
  keygen_cmd->callback([&] {
    kg.seeded = keygen_cmd->count("--seed") > 0;
    status = run_keygen(kg);
  });

  MkdbArgs mk;
  auto* mkdb_cmd = app.add_subcommand("mkdb", "Synthesize a random database");
  mkdb_cmd->add_option("--n", mk.n, "Item count, e.g. 1024 or 2^10");
  mkdb_cmd->add_option("--item-bytes", mk.item_bytes)->check(CLI::PositiveNumber);
  mkdb_cmd->add_option("--lane-bits", mk.lane_bits)->check(CLI::Range(1, 63));
  mkdb_cmd->add_option("--pk", mk.pk_path, "Size lanes for this public key")->check(CLI::ExistingFile);
  mkdb_cmd->add_option("--weights", mk.weights)->check(CLI::IsMember({"items", "ones"}));
  mkdb_cmd->add_option("--out", mk.out);
  mkdb_cmd->add_option("--weights-out", mk.weights_out);
  mkdb_cmd->add_option("--seed", mk.seed);
  mkdb_cmd->callback([&] { status = run_mkdb(mk); });

  ServeArgs sv;
  auto* serve_cmd = app.add_subcommand("serve", "Run a server");
  serve_cmd->add_option("--listen", sv.listen);
  serve_cmd->add_option("--db", sv.db)->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--weights", sv.weights)->check(CLI::ExistingFile);
  serve_cmd->add_option("--pk", sv.pks)->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--schemes", sv.schemes)->delimiter(',')->check(scheme_check);
  serve_cmd->add_option("--max-concurrent", sv.max_concurrent)->check(CLI::PositiveNumber);
  serve_cmd->add_option("--tamper", sv.tamper, "Misbehave: additive, replace or swap")
      ->check(CLI::IsMember({"honest", "additive", "replace", "swap"}));
  serve_cmd->add_option("--seed", sv.seed, "Seed of the tampering offsets");
  serve_cmd->callback([&] { status = run_serve(sv); });

  QueryArgs qa;
  auto* query_cmd = app.add_subcommand("query", "Query the servers");
  query_cmd->add_option("--scheme", qa.scheme)->check(scheme_check);
  query_cmd->add_option("--sk", qa.sk_path)->check(CLI::ExistingFile);
  query_cmd->add_option("--servers", qa.servers)->required()->delimiter(',');
  query_cmd->add_option("--n", qa.n, "Database size");
  auto* index_opt = query_cmd->add_option("--index", qa.index, "Point query index (1-based)");
  auto* select_opt = query_cmd->add_option("--select", qa.select)->delimiter(',');
  auto* range_opt = query_cmd->add_option("--range", qa.range, "lo:hi (inclusive)");
  index_opt->excludes(select_opt)->excludes(range_opt);
  query_cmd->add_option("--item-bytes", qa.item_bytes, "Print the item as hex");
  query_cmd->add_option("--lane-bits", qa.lane_bits);
  query_cmd->add_option("--seed", qa.seed);
  query_cmd->add_option("--save-vk", qa.vk_out);
  query_cmd->add_option("--save-answers", qa.answers_out);
  query_cmd->add_option("--timeout", qa.timeout_seconds, "Seconds per server")->check(CLI::PositiveNumber);
  query_cmd->callback([&] {
    qa.seeded = query_cmd->count("--seed") > 0;
    status = run_query(qa);
  });

  VerifyArgs va;
  auto* verify_cmd = app.add_subcommand("verify", "Check answers with (pk, vk) only");
  verify_cmd->add_option("--pk", va.pk_path)->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--vk", va.vk_path)->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--answers", va.answers_path)->required()->check(CLI::ExistingFile);
  verify_cmd->callback([&] { status = run_verify(va); });

  ExperimentArgs ea;
  auto add_experiment_options = [&](CLI::App* cmd) {
    cmd->add_option("--scheme", ea.scheme)->check(scheme_check);
    cmd->add_option("--profile", ea.profile)->check(profile_check)->envname("PVPIR_PROFILE");
    cmd->add_option("--bits", ea.bits, "Explicit modulus size");
    cmd->add_flag("--calibration", ea.calibration, "q = 11 group / n = 55 key");
    cmd->add_option("--n", ea.n);
    cmd->add_option("--k", ea.k)->check(CLI::Range(2, 255));
    cmd->add_option("--strategy", ea.strategy)
        ->check(CLI::IsMember({"honest", "additive", "replace", "swap"}));
    cmd->add_option("--targets", ea.targets, "Corrupted servers (1-based)")->delimiter(',');
    cmd->add_option("--delta", ea.delta, "Fixed payload offset");
    cmd->add_option("--delta-prime", ea.delta_prime, "Fixed tag offset (RSA: multiplier)");
    cmd->add_option("--trials", ea.trials);
    cmd->add_option("--seed", ea.seed);
  };
  auto* exp_cmd = app.add_subcommand("exp-ver", "Run the verifiability experiment");
  add_experiment_options(exp_cmd);
  exp_cmd->add_option("--out", ea.out, "JSON-lines records");
  exp_cmd->add_flag("--transcripts", ea.transcripts, "Include frames in the records");
  exp_cmd->callback([&] { status = run_exp_ver(ea); });
  auto* probe_cmd = app.add_subcommand("probe-sf", "Selective-failure probe on two point functions");
  add_experiment_options(probe_cmd);
  probe_cmd->add_option("--i0", ea.i0);
  probe_cmd->add_option("--i1", ea.i1);
  probe_cmd->callback([&] { status = run_probe_sf(ea); });

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Benchmarks, CSV output");
  bench_cmd->add_option("kind", ba.kind)->check(CLI::IsMember({"overhead", "bandwidth", "point"}));
  bench_cmd->add_option("--scheme", ba.scheme)->check(scheme_check);
  bench_cmd->add_option("--profile", ba.profile)->check(profile_check)->envname("PVPIR_PROFILE");
  bench_cmd->add_option("--sizes", ba.sizes, "e.g. 2^10,2^20")->delimiter(',');
  bench_cmd->add_option("--k", ba.k)->check(CLI::Range(2, 255));
  bench_cmd->add_option("--trials", ba.trials)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--item-bytes", ba.item_bytes)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", ba.seed);
  bench_cmd->add_option("--max-bytes", ba.max_bytes);
  bench_cmd->add_option("--out", ba.out, "Per-trial CSV");
  bench_cmd->add_option("--summary", ba.summary, "Summary CSV");
  bench_cmd->callback([&] { status = run_bench(ba); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return status;
}
