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

#ifndef PVPIR_TRANSPORT_HPP_
#define PVPIR_TRANSPORT_HPP_

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "pvpir/bigint.hpp"
#include "pvpir/database.hpp"
#include "pvpir/errors.hpp"
#include "pvpir/pvpir.hpp"
#include "pvpir/wire.hpp"

namespace pvpir::transport {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Rewrites an answer before it is sent. Lets a test or demo server
// misbehave; honest servers leave it empty.
using AnswerFilter = std::function<void(AnswerPair&, const PublicKey&)>;

// The request handler shared by every transport. Holds only public data.
class ServerCore {
 public:
  ServerCore(wire::KeyRing keys, DatabaseView db, std::set<SchemeId> allowed,
             AnswerFilter filter = {})
      : keys_(std::move(keys)),
        db_(std::move(db)),
        allowed_(std::move(allowed)),
        filter_(std::move(filter)) {}

  const DatabaseView& database() const { return db_; }

  // One QUERY frame in, one ANSWER or ERROR frame out. Error payloads carry
  // a code and a fixed message, never decoder or protocol detail.
  Bytes handle_frame(std::span<const std::uint8_t> request) const {
    std::uint8_t tag = request.size() > 5 ? request[5] : 0;
    try {
      wire::Frame frame = wire::decode_frame(request);
      if (frame.type != wire::MsgType::kQuery) {
        return fail(tag, wire::ErrorCode::kBadMessageType, "expected a query");
      }
      const SchemeId scheme = scheme_from_tag(frame.scheme_tag);
      if (!allowed_.contains(scheme)) {
        return fail(tag, wire::ErrorCode::kSchemeNotAllowed, "scheme not served");
      }
      QueryShare share = wire::decode_query_share(frame.payload, keys_);
      if (share.scheme != scheme) return fail(tag, wire::ErrorCode::kMalformed, "malformed query");
      if (share.payload.domain_size != db_.size()) {
        return fail(tag, wire::ErrorCode::kDomainMismatch, "domain size mismatch");
      }
      const PublicKey& pk = keys_.for_scheme(scheme, share.payload.group.is_modular()
                                                         ? wire::KeyRing::kModular
                                                         : wire::KeyRing::kIntegers);
      AnswerPair ans = answer(pk, db_, share);
      if (filter_) filter_(ans, pk);
      wire::Frame reply{wire::kVersion, frame.scheme_tag, wire::MsgType::kAnswer,
                        wire::encode_answer(ans, pk)};
      return wire::encode_frame(reply);
    } catch (const wire::FrameError& e) {
      return fail(tag, e.code(), e.code() == wire::ErrorCode::kBadVersion ? "unsupported version"
                                                                          : "malformed query");
    } catch (const DecodeError&) {
      return fail(tag, wire::ErrorCode::kMalformed, "malformed query");
    } catch (const InvalidArgument&) {
      return fail(tag, wire::ErrorCode::kMalformed, "malformed query");
    } catch (const std::exception&) {
      return fail(tag, wire::ErrorCode::kInternal, "internal error");
    }
  }

 private:
  static Bytes fail(std::uint8_t tag, wire::ErrorCode code, std::string_view message) {
    return wire::encode_frame(wire::error_frame(tag, code, message));
  }

  wire::KeyRing keys_;
  DatabaseView db_;
  std::set<SchemeId> allowed_;
  AnswerFilter filter_;
};

// A request/response channel to one server.
class Endpoint {
 public:
  virtual ~Endpoint() = default;
  virtual Bytes exchange(std::span<const std::uint8_t> request) = 0;
  virtual std::string name() const = 0;
};

// In-process server. Records how long the handler ran.
class LoopbackEndpoint : public Endpoint {
 public:
  explicit LoopbackEndpoint(std::shared_ptr<const ServerCore> core, std::string name = "loopback")
      : core_(std::move(core)), name_(std::move(name)) {}

  Bytes exchange(std::span<const std::uint8_t> request) override {
    auto start = Clock::now();
    Bytes reply = core_->handle_frame(request);
    last_server_seconds_ = seconds_since(start);
    return reply;
  }
  std::string name() const override { return name_; }
  double last_server_seconds() const { return last_server_seconds_; }

 private:
  std::shared_ptr<const ServerCore> core_;
  std::string name_;
  double last_server_seconds_ = 0;
};

// Wraps another endpoint and keeps a copy of every frame in both directions.
class RecordingEndpoint : public Endpoint {
 public:
  explicit RecordingEndpoint(Endpoint& inner) : inner_(inner) {}

  Bytes exchange(std::span<const std::uint8_t> request) override {
    sent_.emplace_back(request.begin(), request.end());
    Bytes reply = inner_.exchange(request);
    received_.push_back(reply);
    return reply;
  }
  std::string name() const override { return inner_.name(); }
  const std::vector<Bytes>& sent() const { return sent_; }
  const std::vector<Bytes>& received() const { return received_; }

 private:
  Endpoint& inner_;
  std::vector<Bytes> sent_;
  std::vector<Bytes> received_;
};

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

inline HostPort parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == text.size()) {
    throw InvalidArgument("endpoint must be host:port");
  }
  HostPort hp{std::string(text.substr(0, colon)), 0};
  unsigned long port = 0;
  for (char c : text.substr(colon + 1)) {
    if (c < '0' || c > '9') throw InvalidArgument("endpoint port is not a number");
    port = port * 10 + static_cast<unsigned long>(c - '0');
    if (port > 65535) throw InvalidArgument("endpoint port out of range");
  }
  if (hp.host.empty()) hp.host = "127.0.0.1";
  hp.port = static_cast<std::uint16_t>(port);
  return hp;
}

namespace detail {

class Socket {
 public:
  explicit Socket(int fd = -1) : fd_(fd) {}
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(Socket&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Socket& operator=(Socket&& o) noexcept {
    if (this != &o) {
      if (fd_ >= 0) ::close(fd_);
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  int fd() const { return fd_; }

 private:
  int fd_;
};

inline void set_timeouts(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

inline void write_all(int fd, std::span<const std::uint8_t> data) {
  std::size_t done = 0;
  while (done < data.size()) {
    ssize_t n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw TransportError(std::string("send failed: ") + std::strerror(errno));
    done += static_cast<std::size_t>(n);
  }
}

inline void read_exact(int fd, std::uint8_t* out, std::size_t size) {
  std::size_t done = 0;
  while (done < size) {
    ssize_t n = ::recv(fd, out + done, size - done, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n == 0) throw TransportError("connection closed mid-frame");
    if (n < 0) {
      if (errno == EAGAIN || errno == EWOULDBLOCK) throw TransportError("timed out");
      throw TransportError(std::string("recv failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

// Reads one length-prefixed frame, refusing bodies above `max_body`.
inline Bytes read_frame(int fd, std::uint32_t max_body) {
  Bytes frame(4);
  read_exact(fd, frame.data(), 4);
  std::uint32_t len = wire::frame_body_length(std::span<const std::uint8_t, 4>(frame.data(), 4));
  if (len > max_body) throw wire::FrameError(wire::ErrorCode::kMalformed, "frame too large");
  frame.resize(4 + static_cast<std::size_t>(len));
  read_exact(fd, frame.data() + 4, len);
  return frame;
}

inline Socket connect_to(const HostPort& hp, std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(hp.port);
  if (int rc = ::getaddrinfo(hp.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + hp.host + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    Socket s(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (s.fd() < 0) continue;
    const int flags = ::fcntl(s.fd(), F_GETFL, 0);
    ::fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(s.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      pollfd pfd{s.fd(), POLLOUT, 0};
      rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
      if (rc == 0) {
        last_error = "connect timed out";
        continue;
      }
      int err = 0;
      socklen_t len = sizeof(err);
      ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
      errno = err;
    }
    if (rc != 0) {
      last_error = std::strerror(errno);
      continue;
    }
    ::fcntl(s.fd(), F_SETFL, flags);
    int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    set_timeouts(s.fd(), timeout);
    return s;
  }
  throw TransportError("cannot connect to " + hp.host + ":" + port + ": " + last_error);
}

}  // namespace detail

inline constexpr std::chrono::milliseconds kDefaultTimeout{30000};

// One TCP connection per exchange.
class TcpEndpoint : public Endpoint {
 public:
  explicit TcpEndpoint(HostPort target, std::chrono::milliseconds timeout = kDefaultTimeout)
      : target_(std::move(target)), timeout_(timeout) {}

  Bytes exchange(std::span<const std::uint8_t> request) override {
    detail::Socket s = detail::connect_to(target_, timeout_);
    detail::write_all(s.fd(), request);
    ::shutdown(s.fd(), SHUT_WR);
    return detail::read_frame(s.fd(), wire::kMaxFrameBytes);
  }
  std::string name() const override { return target_.host + ":" + std::to_string(target_.port); }

 private:
  HostPort target_;
  std::chrono::milliseconds timeout_;
};

struct ServerConfig {
  std::string listen = "127.0.0.1:7700";
  std::filesystem::path database;
  std::filesystem::path weights;  // empty: items are their own weights
  std::vector<std::filesystem::path> public_keys;
  std::set<SchemeId> allowed = {SchemeId::kPlainFssPir, SchemeId::kDlPredicate,
                                SchemeId::kRsaPredicate, SchemeId::kDlPoint};
  std::size_t max_concurrent = 8;
  std::uint32_t max_frame_bytes = wire::kMaxFrameBytes;
  std::chrono::milliseconds io_timeout = kDefaultTimeout;
  AnswerFilter filter;
};

inline wire::KeyRing load_key_ring(const std::vector<std::filesystem::path>& paths) {
  wire::KeyRing ring;
  for (const auto& path : paths) {
    PublicKey pk = wire::decode_public_key(wire::files::read(path, wire::files::kPublicKeyMagic));
    (pk.is_rsa() ? ring.rsa : ring.dl) = pk;
  }
  return ring;
}

namespace detail {

inline std::atomic<bool>& shutdown_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

extern "C" inline void on_shutdown_signal(int) { shutdown_flag().store(true); }

}  // namespace detail

// Accept loop over an already-loaded core. Returns when `stop` becomes true
// or SIGINT/SIGTERM arrives. `on_listening` receives the bound port.
inline void serve_core(std::shared_ptr<const ServerCore> core, const ServerConfig& config,
                       const std::atomic<bool>& stop,
                       const std::function<void(std::uint16_t)>& on_listening = {}) {
  std::signal(SIGINT, detail::on_shutdown_signal);
  std::signal(SIGTERM, detail::on_shutdown_signal);
  detail::shutdown_flag().store(false);

  HostPort hp = parse_endpoint(config.listen);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string port = std::to_string(hp.port);
  if (int rc = ::getaddrinfo(hp.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw TransportError("cannot resolve " + hp.host + ": " + ::gai_strerror(rc));
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, &::freeaddrinfo);
  detail::Socket listener(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
  if (listener.fd() < 0) throw TransportError("socket failed");
  int one = 1;
  ::setsockopt(listener.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(listener.fd(), res->ai_addr, res->ai_addrlen) != 0 ||
      ::listen(listener.fd(), 64) != 0) {
    throw TransportError("cannot listen on " + config.listen + ": " + std::strerror(errno));
  }
  sockaddr_storage bound{};
  socklen_t bound_len = sizeof(bound);
  ::getsockname(listener.fd(), reinterpret_cast<sockaddr*>(&bound), &bound_len);
  const std::uint16_t bound_port =
      ntohs(bound.ss_family == AF_INET6 ? reinterpret_cast<sockaddr_in6*>(&bound)->sin6_port
                                        : reinterpret_cast<sockaddr_in*>(&bound)->sin_port);
  if (on_listening) on_listening(bound_port);

  std::mutex mu;
  std::condition_variable idle;
  std::size_t active = 0;

  auto handle = [&, core](detail::Socket conn, bool admitted) {
    try {
      detail::set_timeouts(conn.fd(), config.io_timeout);
      if (!admitted) {
        detail::write_all(conn.fd(), wire::encode_frame(wire::error_frame(
                                         0, wire::ErrorCode::kBusy, "server busy")));
      } else {
        Bytes reply;
        try {
          Bytes request = detail::read_frame(conn.fd(), config.max_frame_bytes);
          reply = core->handle_frame(request);
        } catch (const wire::FrameError& e) {
          reply = wire::encode_frame(wire::error_frame(0, e.code(), "malformed query"));
        }
        detail::write_all(conn.fd(), reply);
      }
    } catch (const std::exception&) {
      // The peer went away; nothing to report to it.
    }
    if (admitted) {
      std::lock_guard lock(mu);
      --active;
      idle.notify_all();
    }
  };

  while (!stop.load() && !detail::shutdown_flag().load()) {
    pollfd pfd{listener.fd(), POLLIN, 0};
    int rc = ::poll(&pfd, 1, 100);
    if (rc <= 0) continue;
    detail::Socket conn(::accept(listener.fd(), nullptr, nullptr));
    if (conn.fd() < 0) continue;
    bool admitted = false;
    {
      std::lock_guard lock(mu);
      if (active < config.max_concurrent) {
        ++active;
        admitted = true;
      }
    }
    std::thread(handle, std::move(conn), admitted).detach();
  }
  std::unique_lock lock(mu);
  idle.wait(lock, [&] { return active == 0; });
}

// Loads (pk, X, weights) from disk and serves them.
inline void serve(const ServerConfig& config, const std::atomic<bool>& stop,
                  const std::function<void(std::uint16_t)>& on_listening = {}) {
  DatabaseView db = dbfile::load(config.database, config.weights);
  wire::KeyRing keys = load_key_ring(config.public_keys);
  if (!keys.dl && !keys.rsa) throw InvalidArgument("server needs at least one public key");
  serve_core(std::make_shared<const ServerCore>(std::move(keys), std::move(db), config.allowed,
                                                config.filter),
             config, stop, on_listening);
}

struct ClientStats {
  double query_seconds = 0;        // share and verification-key generation
  double network_seconds = 0;      // fan-out until the last answer arrives
  double reconstruct_seconds = 0;  // aggregation and the public check
  std::vector<double> server_seconds;  // loopback endpoints only
  std::uint64_t upload_bytes = 0;
  std::uint64_t download_bytes = 0;
  std::vector<std::uint64_t> upload_per_server;
  std::vector<std::uint64_t> download_per_server;

  double user_seconds() const { return query_seconds + reconstruct_seconds; }
  double mean_server_seconds() const {
    if (server_seconds.empty()) return 0;
    double sum = 0;
    for (double s : server_seconds) sum += s;
    return sum / static_cast<double>(server_seconds.size());
  }
};

struct ClientResult {
  Outcome outcome = Outcome::reject();
  std::optional<VerificationKey> vk;
  BigInt alpha;
  std::vector<AnswerPair> answers;
  ClientStats stats;
};

// kSequential contacts one server at a time and drops each request once it
// is answered, which keeps timings clean and peak memory lower.
enum class FanOut { kConcurrent, kSequential };

// Sends share j to endpoints[j] only, then reconstructs. Any transport or
// server error aborts the query with TransportError.
inline ClientResult run_client(std::span<Endpoint* const> endpoints, const SchemeKeys& keys,
                               const fss::FunctionDescription& f, Rng& rng,
                               const QueryOptions& options = {},
                               FanOut fan_out = FanOut::kConcurrent) {
  const std::size_t k = endpoints.size();
  ClientResult result;
  auto t0 = Clock::now();
  QueryBundle bundle = query(keys, f, k, rng, options);
  std::vector<Bytes> requests;
  for (auto& share : bundle.shares) {
    requests.push_back(wire::encode_frame({wire::kVersion, static_cast<std::uint8_t>(keys.scheme),
                                           wire::MsgType::kQuery, wire::encode_query_share(share)}));
    share.payload.body = fss::VectorKey{};
    share.verify.reset();
  }
  result.stats.query_seconds = seconds_since(t0);
  result.vk = bundle.vk;
  result.alpha = bundle.alpha;
  bundle.shares.clear();
  for (const auto& req : requests) result.stats.upload_per_server.push_back(req.size());

  auto t1 = Clock::now();
  std::vector<Bytes> replies(k);
  std::optional<std::string> failure;
  if (fan_out == FanOut::kSequential) {
    for (std::size_t j = 0; j < k && !failure; ++j) {
      try {
        replies[j] = endpoints[j]->exchange(requests[j]);
      } catch (const std::exception& e) {
        failure = endpoints[j]->name() + ": " + e.what();
      }
      Bytes().swap(requests[j]);
    }
  } else {
    std::vector<std::future<Bytes>> pending;
    for (std::size_t j = 0; j < k; ++j) {
      pending.push_back(
          std::async(std::launch::async, [&, j] { return endpoints[j]->exchange(requests[j]); }));
    }
    for (std::size_t j = 0; j < k; ++j) {
      try {
        replies[j] = pending[j].get();
      } catch (const std::exception& e) {
        if (!failure) failure = endpoints[j]->name() + ": " + e.what();
      }
    }
  }
  result.stats.network_seconds = seconds_since(t1);
  if (failure) throw TransportError(*failure);

  const wire::KeyRing ring = wire::KeyRing::of(keys.pk);
  for (std::size_t j = 0; j < k; ++j) {
    result.stats.download_per_server.push_back(replies[j].size());
    result.stats.upload_bytes += result.stats.upload_per_server[j];
    result.stats.download_bytes += replies[j].size();
    if (auto* loop = dynamic_cast<LoopbackEndpoint*>(endpoints[j])) {
      result.stats.server_seconds.push_back(loop->last_server_seconds());
    }
    wire::Frame frame;
    try {
      frame = wire::decode_frame(replies[j]);
    } catch (const DecodeError& e) {
      throw TransportError(endpoints[j]->name() + ": unreadable reply");
    }
    if (frame.type == wire::MsgType::kError) {
      auto err = wire::decode_error(frame.payload);
      throw TransportError(endpoints[j]->name() + ": server error " +
                           std::to_string(static_cast<int>(err.code)) + " (" + err.message + ")");
    }
    if (frame.type != wire::MsgType::kAnswer) {
      throw TransportError(endpoints[j]->name() + ": unexpected reply type");
    }
    result.answers.push_back(wire::decode_answer(frame.payload, ring));
    if (result.answers.back().scheme != keys.scheme) {
      throw TransportError(endpoints[j]->name() + ": answer for another scheme");
    }
  }

  auto t2 = Clock::now();
  result.outcome = reconstruct(result.answers, keys.pk, result.vk);
  result.stats.reconstruct_seconds = seconds_since(t2);
  return result;
}

// The third-party check: the accept bit from (answers, pk, vk) alone.
inline bool verify_standalone(std::span<const AnswerPair> answers, const PublicKey& pk,
                              const VerificationKey& vk) {
  return verify(answers, pk, vk);
}

// Answer-set file body: u8 count, then per answer a u32 length and the
// encoded answer.
inline Bytes encode_answer_set(std::span<const AnswerPair> answers, const PublicKey& pk) {
  if (answers.empty() || answers.size() > 255) throw InvalidArgument("bad answer count");
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(answers.size()));
  for (const auto& a : answers) {
    Bytes body = wire::encode_answer(a, pk);
    w.u32(static_cast<std::uint32_t>(body.size()));
    w.raw(body);
  }
  return std::move(w).take();
}

inline std::vector<AnswerPair> decode_answer_set(std::span<const std::uint8_t> bytes,
                                                 const PublicKey& pk) {
  ByteReader r(bytes);
  const std::uint8_t count = r.u8();
  if (count == 0) throw DecodeError("empty answer set");
  const wire::KeyRing ring = wire::KeyRing::of(pk);
  std::vector<AnswerPair> out;
  for (std::uint8_t i = 0; i < count; ++i) {
    const std::uint32_t len = r.u32();
    out.push_back(wire::decode_answer(r.raw(len), ring));
  }
  r.expect_done();
  return out;
}

}  // namespace pvpir::transport

#endif  // PVPIR_TRANSPORT_HPP_
