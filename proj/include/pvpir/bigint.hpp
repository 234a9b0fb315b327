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

#ifndef PVPIR_BIGINT_HPP_
#define PVPIR_BIGINT_HPP_

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pvpir/errors.hpp"

namespace pvpir {

using BigInt = mpz_class;
using Bytes = std::vector<std::uint8_t>;

inline std::size_t bit_length(const BigInt& x) {
  return mpz_sgn(x.get_mpz_t()) == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2);
}

// Magnitude as big-endian bytes, no leading zeros (empty for zero).
inline Bytes magnitude_bytes(const BigInt& x) {
  std::size_t count = (bit_length(x) + 7) / 8;
  Bytes out(count);
  if (count > 0) {
    std::size_t written = 0;
    mpz_export(out.data(), &written, 1, 1, 1, 0, x.get_mpz_t());
  }
  return out;
}

// Magnitude left-padded to exactly `width` bytes.
inline Bytes to_fixed_bytes(const BigInt& x, std::size_t width) {
  Bytes mag = magnitude_bytes(x);
  if (mag.size() > width) throw InvalidArgument("integer wider than field");
  Bytes out(width - mag.size(), 0);
  out.insert(out.end(), mag.begin(), mag.end());
  return out;
}

inline BigInt from_bytes_be(std::span<const std::uint8_t> bytes) {
  BigInt out;
  if (!bytes.empty()) {
    mpz_import(out.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  }
  return out;
}

inline BigInt from_bytes_le(std::span<const std::uint8_t> bytes) {
  BigInt out;
  if (!bytes.empty()) {
    mpz_import(out.get_mpz_t(), bytes.size(), -1, 1, 0, 0, bytes.data());
  }
  return out;
}

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

inline Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw DecodeError("bad hex digit");
  };
  if (hex.size() % 2 != 0) throw DecodeError("odd hex length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 |
                                       nibble(hex[2 * i + 1]));
  }
  return out;
}

// Append-only encoder for the wire and file formats. Integers are
// big-endian; big integers use a 2-byte magnitude length, the magnitude,
// then one sign byte (0x00 positive, 0x01 negative).
class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
      buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
  }
  void raw(std::span<const std::uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  }
  void bigint(const BigInt& x) {
    Bytes mag = magnitude_bytes(x);
    if (mag.size() > 0xFFFF) throw InvalidArgument("big integer too long");
    u16(static_cast<std::uint16_t>(mag.size()));
    raw(mag);
    u8(mpz_sgn(x.get_mpz_t()) < 0 ? 0x01 : 0x00);
  }

  const Bytes& bytes() const& { return buf_; }
  Bytes take() && { return std::move(buf_); }

 private:
  Bytes buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return need(1)[0]; }
  std::uint16_t u16() {
    auto b = need(2);
    return static_cast<std::uint16_t>(b[0] << 8 | b[1]);
  }
  std::uint32_t u32() {
    auto b = need(4);
    return std::uint32_t{b[0]} << 24 | std::uint32_t{b[1]} << 16 |
           std::uint32_t{b[2]} << 8 | std::uint32_t{b[3]};
  }
  std::span<const std::uint8_t> raw(std::size_t n) { return need(n); }
  BigInt bigint() {
    std::uint16_t len = u16();
    auto mag = need(len);
    if (len > 0 && mag[0] == 0) throw DecodeError("non-minimal integer");
    std::uint8_t sign = u8();
    if (sign > 1) throw DecodeError("bad sign byte");
    BigInt out = from_bytes_be(mag);
    if (sign == 1) {
      if (len == 0) throw DecodeError("negative zero");
      out = -out;
    }
    return out;
  }

  std::size_t remaining() const { return data_.size() - pos_; }
  bool done() const { return pos_ == data_.size(); }
  void expect_done() const {
    if (!done()) throw DecodeError("trailing bytes");
  }

 private:
  std::span<const std::uint8_t> need(std::size_t n) {
    if (data_.size() - pos_ < n) throw DecodeError("truncated input");
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace pvpir

#endif  // PVPIR_BIGINT_HPP_
