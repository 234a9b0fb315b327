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

// Retrieves one item from two in-process servers with the point scheme,
// re-checks the answers the way a third party would, then shows a
// tampering server being caught.

#include <iostream>
#include <memory>
#include <vector>

#include "pvpir/adversary.hpp"
#include "pvpir/database.hpp"
#include "pvpir/pvpir.hpp"
#include "pvpir/transport.hpp"

int main() {
  using namespace pvpir;  // NOLINT(build/namespaces)

  Rng rng = Rng::from_seed(2026);
  SchemeKeys keys = keygen(SchemeId::kDlPoint, Profile::kToy, rng);

  // 1000 items of 32 bytes, split into lanes the group can carry.
  dbfile::ItemTable table = dbfile::random_items(1000, 32, keys.pk.max_lane_bits(), rng);
  DatabaseView db = DatabaseView::self_weighted(table.lanes(), table.lane_bits, table.item_bytes);

  const std::set<SchemeId> schemes = {SchemeId::kDlPoint};
  auto honest = std::make_shared<const transport::ServerCore>(wire::KeyRing::of(keys.pk), db, schemes);
  transport::LoopbackEndpoint s1(honest, "s1");
  transport::LoopbackEndpoint s2(honest, "s2");
  std::vector<transport::Endpoint*> servers = {&s1, &s2};

  const std::uint64_t index = 417;
  auto f = point_query_build(db, index, keys.pk.share_group()).f;
  transport::ClientResult result = transport::run_client(servers, keys, f, rng);

  std::vector<std::uint64_t> lanes;
  for (const auto& v : result.outcome.values()) lanes.push_back(v.get_ui());
  Bytes item = unchunk_item(lanes, db.lane_bits(), db.item_bytes());
  std::cout << "item " << index << ": " << to_hex(item) << '\n'
            << "matches table: " << (item == table.items[index - 1] ? "yes" : "no") << '\n'
            << "bytes up/down: " << result.stats.upload_bytes << " / "
            << result.stats.download_bytes << '\n';

  // Anyone holding (pk, vk, answers) reaches the same verdict.
  std::cout << "third-party check: "
            << (transport::verify_standalone(result.answers, keys.pk, *result.vk) ? "ACCEPT"
                                                                                   : "REJECT")
            << '\n';

  // Server 2 now adds a random offset to everything it returns.
  Rng tamper_rng = Rng::from_seed(7);
  auto strategy = adversary::TamperStrategy::additive({1});
  auto cheating = std::make_shared<const transport::ServerCore>(
      wire::KeyRing::of(keys.pk), db, schemes, [&](AnswerPair& a, const PublicKey& pk) {
        adversary::apply_tamper(strategy, a, pk, tamper_rng);
      });
  transport::LoopbackEndpoint bad(cheating, "s2-cheating");
  std::vector<transport::Endpoint*> mixed = {&s1, &bad};
  auto tampered = transport::run_client(mixed, keys, f, rng);
  std::cout << "with a cheating server: " << (tampered.outcome.accepted() ? "ACCEPT" : "REJECT")
            << '\n';
  return 0;
}
