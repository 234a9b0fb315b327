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

#ifndef PVPIR_DATABASE_HPP_
#define PVPIR_DATABASE_HPP_

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pvpir/bigint.hpp"
#include "pvpir/errors.hpp"
#include "pvpir/rng.hpp"

namespace pvpir {

inline constexpr std::size_t kDefaultLaneBits = 31;

inline std::size_t lane_count(std::size_t item_bits, std::size_t lane_bits) {
  if (lane_bits == 0 || lane_bits > 63) throw InvalidArgument("lane width must be in [1, 63]");
  return item_bits == 0 ? 1 : (item_bits + lane_bits - 1) / lane_bits;
}

// Splits a little-endian item into `lane_bits`-wide lanes, low lane first.
inline std::vector<std::uint64_t> chunk_item(std::span<const std::uint8_t> item,
                                             std::size_t lane_bits) {
  const std::size_t lanes = lane_count(item.size() * 8, lane_bits);
  std::vector<std::uint64_t> out(lanes, 0);
  for (std::size_t bit = 0; bit < item.size() * 8; ++bit) {
    if ((item[bit / 8] >> (bit % 8)) & 1) {
      out[bit / lane_bits] |= std::uint64_t{1} << (bit % lane_bits);
    }
  }
  return out;
}

inline Bytes unchunk_item(std::span<const std::uint64_t> lanes, std::size_t lane_bits,
                          std::size_t item_bytes) {
  Bytes out(item_bytes, 0);
  for (std::size_t bit = 0; bit < item_bytes * 8; ++bit) {
    const std::size_t lane = bit / lane_bits;
    if (lane < lanes.size() && ((lanes[lane] >> (bit % lane_bits)) & 1)) {
      out[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
    }
  }
  return out;
}

// N rows of `lanes` small non-negative integers, row-major.
struct LaneMatrix {
  std::size_t rows = 0;
  std::size_t lanes = 0;
  std::vector<std::uint64_t> values;

  static LaneMatrix ones(std::size_t rows) { return {rows, 1, std::vector<std::uint64_t>(rows, 1)}; }

  std::span<const std::uint64_t> row(std::size_t i) const {
    return std::span<const std::uint64_t>(values).subspan(i * lanes, lanes);
  }
  std::uint64_t at(std::size_t i, std::size_t lane) const { return values[i * lanes + lane]; }

  friend bool operator==(const LaneMatrix&, const LaneMatrix&) = default;
};

// The server-side data: items X (as lanes) and the public weights. When the
// weights are the items themselves both views share one matrix.
class DatabaseView {
 public:
  DatabaseView(LaneMatrix items, LaneMatrix weights, std::size_t lane_bits = kDefaultLaneBits,
               std::size_t item_bytes = 0)
      : DatabaseView(std::make_shared<const LaneMatrix>(std::move(items)),
                     std::make_shared<const LaneMatrix>(std::move(weights)), lane_bits,
                     item_bytes) {}

  DatabaseView(std::shared_ptr<const LaneMatrix> items, std::shared_ptr<const LaneMatrix> weights,
               std::size_t lane_bits = kDefaultLaneBits, std::size_t item_bytes = 0)
      : items_(std::move(items)),
        weights_(std::move(weights)),
        lane_bits_(lane_bits),
        item_bytes_(item_bytes) {
    if (!items_ || !weights_) throw InvalidArgument("missing lane matrix");
    if (items_->rows == 0) throw InvalidArgument("empty database");
    if (items_->rows != weights_->rows) throw InvalidArgument("database and weight lengths differ");
    if (items_->values.size() != items_->rows * items_->lanes ||
        weights_->values.size() != weights_->rows * weights_->lanes || weights_->lanes == 0) {
      throw InvalidArgument("lane matrix shape mismatch");
    }
  }

  // Items that double as their own weights (point queries).
  static DatabaseView self_weighted(LaneMatrix items, std::size_t lane_bits,
                                    std::size_t item_bytes = 0) {
    auto shared = std::make_shared<const LaneMatrix>(std::move(items));
    return DatabaseView(shared, shared, lane_bits, item_bytes);
  }

  // Single-lane items used directly as their own weights.
  static DatabaseView from_values(std::vector<std::uint64_t> values) {
    const std::size_t n = values.size();
    return self_weighted(LaneMatrix{n, 1, std::move(values)}, 63, 0);
  }

  // Same items, different public weights.
  DatabaseView with_weights(LaneMatrix weights) const {
    return DatabaseView(items_, std::make_shared<const LaneMatrix>(std::move(weights)),
                        lane_bits_, item_bytes_);
  }

  std::size_t size() const { return items_->rows; }
  const LaneMatrix& items() const { return *items_; }
  const LaneMatrix& weights() const { return *weights_; }
  std::size_t lane_bits() const { return lane_bits_; }
  std::size_t item_bytes() const { return item_bytes_; }

 private:
  std::shared_ptr<const LaneMatrix> items_;
  std::shared_ptr<const LaneMatrix> weights_;
  std::size_t lane_bits_;
  std::size_t item_bytes_;
};

// On-disk layout (all header integers little-endian):
//   magic "PVDB" | u32 version | u64 N | u32 item bits | u32 lane count |
//   u32 lane bits | N items of ceil(bits/8) little-endian bytes.
// The weights file mirrors it with magic "PVWT", 64-bit entries and
// N * lanes little-endian u64 weights.
namespace dbfile {

inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 28;

struct Header {
  std::array<char, 4> magic;
  std::uint32_t version = kVersion;
  std::uint64_t rows = 0;
  std::uint32_t entry_bits = 0;
  std::uint32_t lanes = 0;
  std::uint32_t lane_bits = 0;
};

namespace detail {

inline void put_le(Bytes& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline std::uint64_t get_le(std::span<const std::uint8_t> in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = v << 8 | in[at + i];
  return v;
}

inline Bytes encode_header(const Header& h) {
  Bytes out(h.magic.begin(), h.magic.end());
  put_le(out, h.version, 4);
  put_le(out, h.rows, 8);
  put_le(out, h.entry_bits, 4);
  put_le(out, h.lanes, 4);
  put_le(out, h.lane_bits, 4);
  return out;
}

inline Header decode_header(std::span<const std::uint8_t> in, std::string_view magic) {
  if (in.size() < kHeaderBytes) throw DecodeError("database file truncated");
  Header h;
  std::copy_n(in.begin(), 4, h.magic.begin());
  if (std::string_view(h.magic.data(), 4) != magic) throw DecodeError("bad database magic");
  h.version = static_cast<std::uint32_t>(get_le(in, 4, 4));
  if (h.version != kVersion) throw DecodeError("unsupported database version");
  h.rows = get_le(in, 8, 8);
  h.entry_bits = static_cast<std::uint32_t>(get_le(in, 16, 4));
  h.lanes = static_cast<std::uint32_t>(get_le(in, 20, 4));
  h.lane_bits = static_cast<std::uint32_t>(get_le(in, 24, 4));
  return h;
}

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

}  // namespace detail

struct ItemTable {
  std::size_t item_bytes = 0;
  std::size_t lane_bits = kDefaultLaneBits;
  std::vector<Bytes> items;

  LaneMatrix lanes() const {
    LaneMatrix m;
    m.rows = items.size();
    m.lanes = lane_count(item_bytes * 8, lane_bits);
    m.values.reserve(m.rows * m.lanes);
    for (const auto& item : items) {
      auto row = chunk_item(item, lane_bits);
      m.values.insert(m.values.end(), row.begin(), row.end());
    }
    return m;
  }
};

inline Bytes encode_items(const ItemTable& t) {
  Header h{{'P', 'V', 'D', 'B'}};
  h.rows = t.items.size();
  h.entry_bits = static_cast<std::uint32_t>(t.item_bytes * 8);
  h.lanes = static_cast<std::uint32_t>(lane_count(t.item_bytes * 8, t.lane_bits));
  h.lane_bits = static_cast<std::uint32_t>(t.lane_bits);
  Bytes out = detail::encode_header(h);
  for (const auto& item : t.items) {
    if (item.size() != t.item_bytes) throw InvalidArgument("item of the wrong length");
    out.insert(out.end(), item.begin(), item.end());
  }
  return out;
}

inline ItemTable decode_items(std::span<const std::uint8_t> data) {
  Header h = detail::decode_header(data, "PVDB");
  if (h.entry_bits % 8 != 0 || h.lane_bits == 0 || h.lane_bits > 63 ||
      h.lanes != lane_count(h.entry_bits, h.lane_bits)) {
    throw DecodeError("inconsistent database header");
  }
  ItemTable t;
  t.item_bytes = h.entry_bits / 8;
  t.lane_bits = h.lane_bits;
  if (h.rows == 0 || (data.size() - kHeaderBytes) != h.rows * t.item_bytes) {
    throw DecodeError("database body does not match its header");
  }
  t.items.reserve(h.rows);
  for (std::uint64_t i = 0; i < h.rows; ++i) {
    auto start = data.begin() + static_cast<std::ptrdiff_t>(kHeaderBytes + i * t.item_bytes);
    t.items.emplace_back(start, start + static_cast<std::ptrdiff_t>(t.item_bytes));
  }
  return t;
}

inline Bytes encode_weights(const LaneMatrix& w) {
  Header h{{'P', 'V', 'W', 'T'}};
  h.rows = w.rows;
  h.entry_bits = 64;
  h.lanes = static_cast<std::uint32_t>(w.lanes);
  Bytes out = detail::encode_header(h);
  for (std::uint64_t v : w.values) detail::put_le(out, v, 8);
  return out;
}

inline LaneMatrix decode_weights(std::span<const std::uint8_t> data) {
  Header h = detail::decode_header(data, "PVWT");
  if (h.entry_bits != 64 || h.lanes == 0) throw DecodeError("inconsistent weights header");
  if (h.rows == 0 || (data.size() - kHeaderBytes) != h.rows * h.lanes * 8) {
    throw DecodeError("weights body does not match its header");
  }
  LaneMatrix w{h.rows, h.lanes, {}};
  w.values.reserve(h.rows * h.lanes);
  for (std::size_t at = kHeaderBytes; at < data.size(); at += 8) {
    w.values.push_back(detail::get_le(data, at, 8));
  }
  return w;
}

// An empty weights path makes the items their own weights.
inline DatabaseView load(const std::filesystem::path& items_path,
                         const std::filesystem::path& weights_path = {}) {
  ItemTable t = decode_items(detail::read_file(items_path));
  if (weights_path.empty()) return DatabaseView::self_weighted(t.lanes(), t.lane_bits, t.item_bytes);
  LaneMatrix w = decode_weights(detail::read_file(weights_path));
  return DatabaseView(t.lanes(), std::move(w), t.lane_bits, t.item_bytes);
}

inline ItemTable random_items(std::size_t n, std::size_t item_bytes, std::size_t lane_bits,
                              Rng& rng) {
  ItemTable t{item_bytes, lane_bits, {}};
  t.items.resize(n, Bytes(item_bytes));
  for (auto& item : t.items) rng.fill(item);
  return t;
}

}  // namespace dbfile

}  // namespace pvpir

#endif  // PVPIR_DATABASE_HPP_
