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

#ifndef PVPIR_TESTS_SUPPORT_FRAME_FUZZ_HPP_
#define PVPIR_TESTS_SUPPORT_FRAME_FUZZ_HPP_

#include <string>
#include <vector>

#include "pvpir/pvpir.hpp"
#include "pvpir/rng.hpp"
#include "pvpir/wire.hpp"

namespace pvpir::testing {

// Public keys the fuzzer draws messages under.
struct FuzzContext {
  PublicKey dl;
  PublicKey rsa;
  wire::KeyRing ring;

  static FuzzContext toy(Rng& rng) {
    FuzzContext ctx{PublicKey::dl(gen_dl_group(16, rng)),
                    PublicKey::rsa(gen_rsa_keypair(16, rng).public_key()), {}};
    ctx.ring.dl = ctx.dl;
    ctx.ring.rsa = ctx.rsa;
    return ctx;
  }
};

inline SchemeId random_scheme(Rng& rng) { return static_cast<SchemeId>(rng.uniform(4)); }

inline const PublicKey& pk_for(const FuzzContext& ctx, SchemeId scheme, bool plain_over_integers) {
  if (uses_rsa(scheme)) return ctx.rsa;
  if (scheme == SchemeId::kPlainFssPir && plain_over_integers) return ctx.rsa;
  return ctx.dl;
}

inline fss::FssKey random_key(Rng& rng, const fss::OutputGroup& group, std::uint8_t party,
                              std::uint64_t n, bool dpf) {
  fss::FssKey key;
  key.party = party;
  key.domain_size = n;
  key.group = group;
  if (dpf) {
    fss::DpfKey body;
    rng.fill(body.root);
    for (std::size_t l = 0; l < fss::ceil_log2(n); ++l) {
      fss::CorrectionWord cw;
      rng.fill(cw.seed);
      cw.left_bit = rng.uniform(2);
      cw.right_bit = rng.uniform(2);
      body.levels.push_back(cw);
    }
    body.output_correction = rng.below(group.modulus());
    key.body = std::move(body);
  } else {
    fss::VectorKey body;
    for (std::uint64_t i = 0; i < n; ++i) {
      body.values.push_back(group.is_modular() ? rng.below(group.modulus())
                                               : rng.bits(group.mask_bits(128)) - rng.bits(60));
    }
    key.body = std::move(body);
  }
  return key;
}

inline QueryShare random_query_share(Rng& rng, const FuzzContext& ctx, SchemeId scheme) {
  const PublicKey& pk = pk_for(ctx, scheme, rng.uniform(2) == 1);
  const std::uint64_t n = 1 + rng.uniform(40);
  const bool dpf = pk.share_group().is_modular() && rng.uniform(2) == 1;
  const std::uint8_t party = dpf ? static_cast<std::uint8_t>(1 + rng.uniform(2))
                                 : static_cast<std::uint8_t>(1 + rng.uniform(5));
  QueryShare share{scheme, random_key(rng, pk.share_group(), party, n, dpf), std::nullopt};
  if (is_verifiable(scheme)) share.verify = random_key(rng, pk.share_group(), party, n, dpf);
  return share;
}

inline AnswerPair random_answer(Rng& rng, const PublicKey& pk, SchemeId scheme) {
  AnswerPair ans{scheme, {}, {}};
  const std::size_t lanes = 1 + rng.uniform(10);
  for (std::size_t l = 0; l < lanes; ++l) {
    ans.a.push_back(pk.share_group().is_modular() ? rng.below(pk.share_group().modulus())
                                                  : rng.bits(200) - rng.bits(200));
    if (is_verifiable(scheme)) ans.a_prime.push_back(rng.below(pk.unit_group().modulus()));
  }
  return ans;
}

// A well-formed QUERY, ANSWER or ERROR frame.
inline Bytes random_frame(Rng& rng, const FuzzContext& ctx) {
  const SchemeId scheme = random_scheme(rng);
  const auto tag = static_cast<std::uint8_t>(scheme);
  switch (rng.uniform(3)) {
    case 0:
      return wire::encode_frame({wire::kVersion, tag, wire::MsgType::kQuery,
                                 wire::encode_query_share(random_query_share(rng, ctx, scheme))});
    case 1: {
      const PublicKey& pk = pk_for(ctx, scheme, rng.uniform(2) == 1);
      return wire::encode_frame({wire::kVersion, tag, wire::MsgType::kAnswer,
                                 wire::encode_answer(random_answer(rng, pk, scheme), pk)});
    }
    default: {
      std::string text(rng.uniform(30), 'x');
      for (auto& c : text) c = static_cast<char>('a' + rng.uniform(26));
      return wire::encode_frame(wire::error_frame(
          tag, static_cast<wire::ErrorCode>(1 + rng.uniform(7)), text));
    }
  }
}

// Full decode to a typed message and back to bytes.
inline Bytes decode_and_reencode(std::span<const std::uint8_t> bytes, const FuzzContext& ctx) {
  wire::Frame frame = wire::decode_frame(bytes);
  Bytes payload;
  switch (frame.type) {
    case wire::MsgType::kQuery: {
      QueryShare share = wire::decode_query_share(frame.payload, ctx.ring);
      if (static_cast<std::uint8_t>(share.scheme) != frame.scheme_tag) {
        throw DecodeError("scheme tag mismatch");
      }
      payload = wire::encode_query_share(share);
      break;
    }
    case wire::MsgType::kAnswer: {
      AnswerPair ans = wire::decode_answer(frame.payload, ctx.ring);
      if (static_cast<std::uint8_t>(ans.scheme) != frame.scheme_tag) {
        throw DecodeError("scheme tag mismatch");
      }
      const bool integers = frame.payload.size() > 1 && frame.payload[1] == wire::KeyRing::kIntegers;
      payload = wire::encode_answer(ans, pk_for(ctx, ans.scheme, integers));
      break;
    }
    case wire::MsgType::kError: {
      if (frame.payload.size() < 2) throw DecodeError("short error payload");
      auto err = wire::decode_error(frame.payload);
      payload = wire::error_frame(frame.scheme_tag, err.code, err.message).payload;
      break;
    }
  }
  return wire::encode_frame({frame.version, frame.scheme_tag, frame.type, std::move(payload)});
}

inline bool rejected(std::span<const std::uint8_t> bytes, const FuzzContext& ctx) {
  try {
    decode_and_reencode(bytes, ctx);
    return false;
  } catch (const DecodeError&) {
    return true;
  }
}

inline void set_length(Bytes& frame) {
  const std::uint32_t len = static_cast<std::uint32_t>(frame.size() - 4);
  for (int i = 0; i < 4; ++i) frame[i] = static_cast<std::uint8_t>(len >> (24 - 8 * i));
}

// Structural mutations; each breaks a documented framing or encoding rule.
inline Bytes mutate(const Bytes& frame, Rng& rng) {
  Bytes out = frame;
  const bool has_body = out.size() > wire::kFrameHeaderBytes + 2 && out[6] != 0xFF;
  switch (rng.uniform(has_body ? 9 : 5)) {
    case 0:  // truncate
      out.resize(rng.uniform(out.size()));
      break;
    case 1:  // trailing garbage beyond the declared length
      for (std::size_t i = 0, n = 1 + rng.uniform(8); i < n; ++i) out.push_back(rng.uniform(256));
      break;
    case 2: {  // wrong length field
      std::uint32_t len = static_cast<std::uint32_t>(out.size() - 4);
      std::uint32_t bad = len;
      while (bad == len) bad = static_cast<std::uint32_t>(rng.uniform(len + 64));
      for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(bad >> (24 - 8 * i));
      break;
    }
    case 3:  // unknown version
      out[4] = static_cast<std::uint8_t>(2 + rng.uniform(254));
      break;
    case 4: {  // unknown message type
      std::uint8_t t = 0;
      while (t == 0x01 || t == 0x02 || t == 0xFF) t = static_cast<std::uint8_t>(rng.uniform(256));
      out[6] = t;
      break;
    }
    case 5:  // unknown scheme tag inside the payload
      out[7] = static_cast<std::uint8_t>(4 + rng.uniform(252));
      break;
    case 6: {  // bad group kind
      std::uint8_t kind = 0;
      while (kind == 1 || kind == 2) kind = static_cast<std::uint8_t>(rng.uniform(256));
      out[8] = kind;
      break;
    }
    case 7:  // payload cut short, length fixed up
      out.resize(wire::kFrameHeaderBytes + 2 + rng.uniform(out.size() - wire::kFrameHeaderBytes - 2));
      set_length(out);
      break;
    default:  // payload extended, length fixed up
      for (std::size_t i = 0, n = 1 + rng.uniform(8); i < n; ++i) out.push_back(rng.uniform(256));
      set_length(out);
      break;
  }
  return out;
}

}  // namespace pvpir::testing

#endif  // PVPIR_TESTS_SUPPORT_FRAME_FUZZ_HPP_
