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

#ifndef PVPIR_WIRE_HPP_
#define PVPIR_WIRE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "pvpir/bigint.hpp"
#include "pvpir/database.hpp"
#include "pvpir/errors.hpp"
#include "pvpir/fss.hpp"
#include "pvpir/pvpir.hpp"

namespace pvpir::wire {

inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kFrameHeaderBytes = 7;  // length + version + scheme + type
inline constexpr std::uint32_t kMaxFrameBytes = 0x7FFFFFFF;

enum class MsgType : std::uint8_t { kQuery = 0x01, kAnswer = 0x02, kError = 0xFF };

enum class ErrorCode : std::uint16_t {
  kBadVersion = 0x01,
  kBadMessageType = 0x02,
  kMalformed = 0x03,
  kSchemeNotAllowed = 0x04,
  kDomainMismatch = 0x05,
  kBusy = 0x06,
  kInternal = 0x07,
};

// Thrown while decoding a frame; carries the code a server answers with.
class FrameError : public DecodeError {
 public:
  FrameError(ErrorCode code, const std::string& what) : DecodeError(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct Frame {
  std::uint8_t version = kVersion;
  std::uint8_t scheme_tag = 0;
  MsgType type = MsgType::kQuery;
  Bytes payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

inline Bytes encode_frame(const Frame& f) {
  if (f.payload.size() + 3 > kMaxFrameBytes) throw InvalidArgument("frame too large");
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(f.payload.size() + 3));
  w.u8(f.version);
  w.u8(f.scheme_tag);
  w.u8(static_cast<std::uint8_t>(f.type));
  w.raw(f.payload);
  return std::move(w).take();
}

// Length field of a frame from its first four bytes.
inline std::uint32_t frame_body_length(std::span<const std::uint8_t, 4> prefix) {
  std::uint32_t len = std::uint32_t{prefix[0]} << 24 | std::uint32_t{prefix[1]} << 16 |
                      std::uint32_t{prefix[2]} << 8 | prefix[3];
  if (len < 3 || len > kMaxFrameBytes) throw FrameError(ErrorCode::kMalformed, "bad frame length");
  return len;
}

// Version and type are checked before anything else in the frame is read.
inline Frame decode_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kFrameHeaderBytes) throw FrameError(ErrorCode::kMalformed, "short frame");
  const std::uint32_t len = frame_body_length(bytes.first<4>());
  if (bytes[4] != kVersion) throw FrameError(ErrorCode::kBadVersion, "unsupported version");
  const std::uint8_t type = bytes[6];
  if (type != 0x01 && type != 0x02 && type != 0xFF) {
    throw FrameError(ErrorCode::kBadMessageType, "unknown message type");
  }
  if (bytes.size() - 4 != len) throw FrameError(ErrorCode::kMalformed, "frame length mismatch");
  Frame f;
  f.version = bytes[4];
  f.scheme_tag = bytes[5];
  f.type = static_cast<MsgType>(type);
  f.payload.assign(bytes.begin() + kFrameHeaderBytes, bytes.end());
  return f;
}

inline Frame error_frame(std::uint8_t scheme_tag, ErrorCode code, std::string_view message) {
  ByteWriter w;
  w.u16(static_cast<std::uint16_t>(code));
  w.raw({reinterpret_cast<const std::uint8_t*>(message.data()), message.size()});
  return {kVersion, scheme_tag, MsgType::kError, std::move(w).take()};
}

struct ErrorMessage {
  ErrorCode code;
  std::string message;
};

inline ErrorMessage decode_error(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  ErrorMessage e{static_cast<ErrorCode>(r.u16()), {}};
  auto text = r.raw(r.remaining());
  e.message.assign(text.begin(), text.end());
  return e;
}

// Public keys a decoder may need to size group elements.
struct KeyRing {
  std::optional<PublicKey> dl;
  std::optional<PublicKey> rsa;

  static KeyRing of(const PublicKey& pk) {
    KeyRing ring;
    (pk.is_rsa() ? ring.rsa : ring.dl) = pk;
    return ring;
  }

  const PublicKey& for_scheme(SchemeId scheme, std::uint8_t group_kind) const {
    const bool want_rsa = is_verifiable(scheme) ? uses_rsa(scheme) : group_kind == kIntegers;
    const auto& pk = want_rsa ? rsa : dl;
    if (!pk) throw FrameError(ErrorCode::kSchemeNotAllowed, "no public key for this scheme");
    return *pk;
  }

  static constexpr std::uint8_t kModular = 1;
  static constexpr std::uint8_t kIntegers = 2;
};

inline std::uint8_t group_kind(const PublicKey& pk) {
  return pk.is_rsa() ? KeyRing::kIntegers : KeyRing::kModular;
}

// scheme | group kind | payload key | verification key (verifiable schemes)
inline Bytes encode_query_share(const QueryShare& share) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(share.scheme));
  w.u8(share.payload.group.is_modular() ? KeyRing::kModular : KeyRing::kIntegers);
  fss::encode_key(w, share.payload);
  if (is_verifiable(share.scheme)) {
    if (!share.verify) throw InvalidArgument("verifiable share without verification key");
    fss::encode_key(w, *share.verify);
  }
  return std::move(w).take();
}

inline QueryShare decode_query_share(std::span<const std::uint8_t> bytes, const KeyRing& keys) {
  ByteReader r(bytes);
  const SchemeId scheme = scheme_from_tag(r.u8());
  const std::uint8_t kind = r.u8();
  if (kind != KeyRing::kModular && kind != KeyRing::kIntegers) throw DecodeError("bad group kind");
  const PublicKey& pk = keys.for_scheme(scheme, kind);
  if (group_kind(pk) != kind) throw DecodeError("group kind does not match the scheme");
  QueryShare share{scheme, fss::decode_key(r, pk.share_group()), std::nullopt};
  if (is_verifiable(scheme)) {
    share.verify = fss::decode_key(r, pk.share_group());
    if (share.verify->party != share.payload.party ||
        share.verify->domain_size != share.payload.domain_size) {
      throw DecodeError("payload and verification keys disagree");
    }
  }
  r.expect_done();
  return share;
}

// scheme | group kind | u16 lanes | a[lanes] | a'[lanes] (verifiable schemes)
inline Bytes encode_answer(const AnswerPair& ans, const PublicKey& pk) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(ans.scheme));
  w.u8(group_kind(pk));
  if (ans.a.empty() || ans.a.size() > 0xFFFF) throw InvalidArgument("bad lane count");
  w.u16(static_cast<std::uint16_t>(ans.a.size()));
  for (const auto& x : ans.a) pk.share_group().write_element(w, x);
  if (is_verifiable(ans.scheme)) {
    if (ans.a_prime.size() != ans.a.size()) throw InvalidArgument("lane count mismatch");
    for (const auto& x : ans.a_prime) pk.unit_group().write_element(w, x);
  }
  return std::move(w).take();
}

inline AnswerPair decode_answer(std::span<const std::uint8_t> bytes, const KeyRing& keys) {
  ByteReader r(bytes);
  const SchemeId scheme = scheme_from_tag(r.u8());
  const std::uint8_t kind = r.u8();
  if (kind != KeyRing::kModular && kind != KeyRing::kIntegers) throw DecodeError("bad group kind");
  const PublicKey& pk = keys.for_scheme(scheme, kind);
  if (group_kind(pk) != kind) throw DecodeError("group kind does not match the scheme");
  const std::uint16_t lanes = r.u16();
  if (lanes == 0) throw DecodeError("answer without lanes");
  AnswerPair ans{scheme, {}, {}};
  for (std::uint16_t l = 0; l < lanes; ++l) ans.a.push_back(pk.share_group().read_element(r));
  if (is_verifiable(scheme)) {
    for (std::uint16_t l = 0; l < lanes; ++l) {
      ans.a_prime.push_back(pk.unit_group().read_element(r));
    }
  }
  r.expect_done();
  return ans;
}

inline Bytes encode_verification_key(const VerificationKey& vk) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(vk.scheme));
  w.bigint(vk.value);
  return std::move(w).take();
}

inline VerificationKey decode_verification_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  VerificationKey vk{scheme_from_tag(r.u8()), r.bigint()};
  r.expect_done();
  if (!is_verifiable(vk.scheme)) throw DecodeError("scheme not verifiable");
  if (vk.value <= 0) throw DecodeError("verification key out of range");
  return vk;
}

inline Bytes encode_public_key(const PublicKey& pk) {
  ByteWriter w;
  pk.encode(w);
  return std::move(w).take();
}

inline PublicKey decode_public_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  PublicKey pk = PublicKey::decode(r);
  r.expect_done();
  return pk;
}

// scheme | public key | has-d flag | d. The DL schemes hold no long-term
// secret; the file then only fixes the scheme and group.
inline Bytes encode_scheme_keys(const SchemeKeys& keys) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(keys.scheme));
  keys.pk.encode(w);
  w.u8(keys.sk ? 1 : 0);
  if (keys.sk) w.bigint(*keys.sk);
  return std::move(w).take();
}

inline SchemeKeys decode_scheme_keys(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const SchemeId scheme = scheme_from_tag(r.u8());
  PublicKey pk = PublicKey::decode(r);
  std::optional<BigInt> sk;
  const std::uint8_t has_d = r.u8();
  if (has_d > 1) throw DecodeError("bad secret key flag");
  if (has_d == 1) sk = r.bigint();
  r.expect_done();
  if (uses_rsa(scheme) && (!pk.is_rsa() || !sk)) throw DecodeError("RSA scheme needs (pk, d)");
  if (is_verifiable(scheme) && !uses_rsa(scheme) && pk.is_rsa()) {
    throw DecodeError("DL scheme with an RSA key");
  }
  return {scheme, std::move(pk), std::move(sk)};
}

// Standalone files: 4-byte magic, version byte, then one encoded message.
namespace files {

inline constexpr std::string_view kPublicKeyMagic = "PVPK";
inline constexpr std::string_view kSecretKeyMagic = "PVSK";
inline constexpr std::string_view kVerificationKeyMagic = "PVVK";
inline constexpr std::string_view kAnswerMagic = "PVAN";

inline void write(const std::filesystem::path& path, std::string_view magic,
                  std::span<const std::uint8_t> body) {
  Bytes out(magic.begin(), magic.end());
  out.push_back(kVersion);
  out.insert(out.end(), body.begin(), body.end());
  dbfile::detail::write_file(path, out);
}

inline Bytes read(const std::filesystem::path& path, std::string_view magic) {
  Bytes data = dbfile::detail::read_file(path);
  if (data.size() < 5 || std::string_view(reinterpret_cast<const char*>(data.data()), 4) != magic) {
    throw DecodeError(path.string() + ": wrong file type");
  }
  if (data[4] != kVersion) throw DecodeError(path.string() + ": unsupported version");
  return Bytes(data.begin() + 5, data.end());
}

}  // namespace files

}  // namespace pvpir::wire

#endif  // PVPIR_WIRE_HPP_
