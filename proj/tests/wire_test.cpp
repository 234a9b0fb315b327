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

#include "pvpir/wire.hpp"

#include <gtest/gtest.h>

#include "pvpir/rng.hpp"
#include "support/frame_fuzz.hpp"

namespace pvpir::wire {
namespace {

TEST(FrameTest, HeaderLayout) {
  Bytes frame = encode_frame({kVersion, 3, MsgType::kAnswer, {0xAA, 0xBB}});
  EXPECT_EQ(frame, (Bytes{0x00, 0x00, 0x00, 0x05, 0x01, 0x03, 0x02, 0xAA, 0xBB}));
  Frame back = decode_frame(frame);
  EXPECT_EQ(back.scheme_tag, 3);
  EXPECT_EQ(back.type, MsgType::kAnswer);
  EXPECT_EQ(back.payload, (Bytes{0xAA, 0xBB}));
}

TEST(FrameTest, VersionAndTypeCheckedBeforePayload) {
  // Length disagrees with the buffer, yet the version error wins.
  Bytes bad_version{0x00, 0x00, 0x00, 0x09, 0x02, 0x01, 0x01};
  try {
    decode_frame(bad_version);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadVersion);
  }
  Bytes bad_type{0x00, 0x00, 0x00, 0x09, 0x01, 0x01, 0x07};
  try {
    decode_frame(bad_type);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kBadMessageType);
  }
}

TEST(FrameTest, ErrorPayload) {
  Frame f = error_frame(1, ErrorCode::kBadVersion, "unsupported version");
  EXPECT_EQ(f.payload[0], 0x00);
  EXPECT_EQ(f.payload[1], 0x01);
  auto err = decode_error(f.payload);
  EXPECT_EQ(err.code, ErrorCode::kBadVersion);
  EXPECT_EQ(err.message, "unsupported version");
}

TEST(MessageTest, VerificationAndPublicKeysRoundTrip) {
  Rng rng = Rng::from_seed(61);
  PublicKey dl = PublicKey::dl(gen_dl_group(64, rng));
  PublicKey rsa = PublicKey::rsa(gen_rsa_keypair(64, rng).public_key());
  for (const PublicKey& pk : {dl, rsa}) EXPECT_EQ(decode_public_key(encode_public_key(pk)), pk);
  VerificationKey vk{SchemeId::kDlPoint, 18};
  EXPECT_EQ(decode_verification_key(encode_verification_key(vk)), vk);
  EXPECT_THROW(decode_verification_key(encode_verification_key({SchemeId::kPlainFssPir, 3})),
               DecodeError);
}

TEST(MessageTest, AnswerWidthIsFixedPerGroup) {
  PublicKey pk = PublicKey::dl(DlGroup{23, 11, 4});
  // scheme, kind, u16 lanes, then two (len, 1 byte, sign) elements.
  Bytes small = encode_answer({SchemeId::kDlPoint, {0}, {10}}, pk);
  EXPECT_EQ(small, (Bytes{0x03, 0x01, 0x00, 0x01, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01, 0x0A, 0x00}));
  EXPECT_THROW(encode_answer({SchemeId::kDlPoint, {11}, {0}}, pk), InvalidArgument);
}

TEST(MessageTest, QueryShareForUnknownKeyFamily) {
  Rng rng = Rng::from_seed(62);
  auto ctx = testing::FuzzContext::toy(rng);
  KeyRing dl_only;
  dl_only.dl = ctx.dl;
  QueryShare share = testing::random_query_share(rng, ctx, SchemeId::kRsaPredicate);
  try {
    decode_query_share(encode_query_share(share), dl_only);
    FAIL();
  } catch (const FrameError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemeNotAllowed);
  }
}

TEST(FuzzTest, WellFormedFramesRoundTrip) {
  Rng rng = Rng::from_seed(63);
  auto ctx = testing::FuzzContext::toy(rng);
  for (int i = 0; i < 2000; ++i) {
    Bytes frame = testing::random_frame(rng, ctx);
    ASSERT_EQ(testing::decode_and_reencode(frame, ctx), frame) << i;
  }
}

TEST(FuzzTest, MutatedFramesAreRejected) {
  Rng rng = Rng::from_seed(64);
  auto ctx = testing::FuzzContext::toy(rng);
  for (int i = 0; i < 2000; ++i) {
    Bytes frame = testing::mutate(testing::random_frame(rng, ctx), rng);
    ASSERT_TRUE(testing::rejected(frame, ctx)) << i << " " << to_hex(frame);
  }
}

}  // namespace
}  // namespace pvpir::wire
