/*
 * Copyright 2026 The mupax project contributors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mupax/bridge/client.hpp"

#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>

#include "mupax/models.hpp"
#include "mupax/rng.hpp"

namespace mupax::bridge {

Endpoint Endpoint::parse(const std::string& text) {
  Endpoint ep;
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) {
    ep.host = text;
  } else {
    ep.host = text.substr(0, colon);
    const std::string port = text.substr(colon + 1);
    char* end = nullptr;
    const long v = std::strtol(port.c_str(), &end, 10);
    if (port.empty() || *end != '\0' || v < 1 || v > 65535) {
      fail(ErrorKind::kInvalidConfig, "bad port in endpoint '" + text + "'");
    }
    ep.port = static_cast<std::uint16_t>(v);
  }
  if (ep.host.empty()) fail(ErrorKind::kInvalidConfig, "empty host in endpoint '" + text + "'");
  return ep;
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

std::chrono::milliseconds timeout_from_env() {
  const char* raw = std::getenv("MUPAX_BRIDGE_TIMEOUT_MS");
  if (raw == nullptr || *raw == '\0') return kDefaultTimeout;
  char* end = nullptr;
  const long long v = std::strtoll(raw, &end, 10);
  if (*end != '\0' || v <= 0) fail(ErrorKind::kInvalidConfig, std::string("bad MUPAX_BRIDGE_TIMEOUT_MS: ") + raw);
  return std::chrono::milliseconds(v);
}

Connection::Connection(const Endpoint& endpoint, std::chrono::milliseconds timeout) : timeout_(timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string port = std::to_string(endpoint.port);
  if (const int rc = ::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    fail(ErrorKind::kConnectionLost, "resolve " + endpoint.to_string() + ": " + ::gai_strerror(rc));
  }
  std::string last_error = "no addresses";
  for (addrinfo* ai = found; ai != nullptr && fd_ < 0; ai = ai->ai_next) {
    const int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    // SO_SNDTIMEO also bounds connect() on Linux.
    timeval tv{};
    tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
    tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
    ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
      fd_ = fd;
    } else {
      last_error = std::strerror(errno);
      ::close(fd);
    }
  }
  ::freeaddrinfo(found);
  if (fd_ < 0) fail(ErrorKind::kConnectionLost, "connect " + endpoint.to_string() + ": " + last_error);

  const Frame ack = exchange(encode_hello(0));
  if (ack.type == FrameType::kError) {
    const std::string text = decode_error(ack);
    close_socket();
    fail(ErrorKind::kServerError, text);
  }
  try {
    max_batch_ = decode_hello_ack(ack);
  } catch (...) {
    close_socket();
    throw;
  }
}

Connection::~Connection() { close_socket(); }

void Connection::close_socket() noexcept {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void Connection::send_bytes(std::span<const std::uint8_t> bytes) {
  if (fd_ < 0) fail(ErrorKind::kConnectionLost, "connection is closed");
  deadline_ = std::chrono::steady_clock::now() + timeout_;
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      close_socket();
      fail(ErrorKind::kTimeout, "send timed out");
    }
    if (n <= 0) {
      const std::string why = std::strerror(errno);
      close_socket();
      fail(ErrorKind::kConnectionLost, "send: " + why);
    }
    sent += static_cast<std::size_t>(n);
  }
}

void Connection::read_exact(std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline_ - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      close_socket();
      fail(ErrorKind::kTimeout, "no response within " + std::to_string(timeout_.count()) + " ms");
    }
    pollfd p{fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1 << 30)));
    if (ready < 0 && errno == EINTR) continue;
    if (ready == 0) continue;  // deadline re-checked above
    if (ready < 0) {
      close_socket();
      fail(ErrorKind::kConnectionLost, std::string("poll: ") + std::strerror(errno));
    }
    const ssize_t r = ::recv(fd_, out + got, n - got, 0);
    if (r < 0 && (errno == EINTR || errno == EAGAIN || errno == EWOULDBLOCK)) continue;
    if (r <= 0) {
      close_socket();
      fail(ErrorKind::kConnectionLost, r == 0 ? "peer closed the connection" : std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
}

Frame Connection::receive_frame() {
  if (fd_ < 0) fail(ErrorKind::kConnectionLost, "connection is closed");
  std::vector<std::uint8_t> buf(4);
  read_exact(buf.data(), 4);
  std::uint32_t length = 0;
  try {
    length = frame_length(std::span<const std::uint8_t, 4>(buf.data(), 4));
  } catch (...) {
    close_socket();
    throw;
  }
  buf.resize(4 + static_cast<std::size_t>(length));
  read_exact(buf.data() + 4, length);
  try {
    return decode_frame(buf);
  } catch (...) {
    close_socket();
    throw;
  }
}

Frame Connection::exchange(std::span<const std::uint8_t> bytes) {
  send_bytes(bytes);
  return receive_frame();
}

std::vector<double> Connection::evaluate_chunk(std::span<const InputTensor> batch) {
  const std::uint64_t id = next_id_++;
  const auto request = encode_eval_request(id, batch);
  ++requests_;
  const Frame reply = exchange(request);
  if (reply.type == FrameType::kError) {
    const std::string text = decode_error(reply);
    close_socket();
    fail(ErrorKind::kServerError, text);
  }
  if (reply.request_id != id) {
    close_socket();
    fail(ErrorKind::kProtocolError,
         "response id " + std::to_string(reply.request_id) + " does not match request " + std::to_string(id));
  }
  try {
    return decode_eval_response(reply, batch.size());
  } catch (...) {
    close_socket();
    throw;
  }
}

std::vector<double> Connection::evaluate(std::span<const InputTensor> batch) {
  if (batch.empty()) fail(ErrorKind::kEmptyBatch, "eval request needs at least one tensor");
  const std::size_t step = std::min<std::size_t>(max_batch_, 0xFFFF);
  std::vector<double> losses;
  losses.reserve(batch.size());
  for (std::size_t begin = 0; begin < batch.size(); begin += step) {
    const auto part = evaluate_chunk(batch.subspan(begin, std::min(step, batch.size() - begin)));
    losses.insert(losses.end(), part.begin(), part.end());
  }
  return losses;
}

std::vector<double> eval_over_bridge(const Endpoint& endpoint, std::span<const InputTensor> batch,
                                     std::chrono::milliseconds timeout) {
  Connection conn(endpoint, timeout);
  return conn.evaluate(batch);
}

BridgePredictor::BridgePredictor(Endpoint endpoint, Shape input_shape, std::size_t pool_size,
                                 std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), shape_(std::move(input_shape)), pool_size_(pool_size), timeout_(timeout) {
  if (pool_size_ == 0) fail(ErrorKind::kInvalidConfig, "bridge pool size must be at least 1");
  // Connect once up front so a dead endpoint fails before sampling starts.
  release(std::make_unique<Connection>(endpoint_, timeout_));
}

std::unique_ptr<Connection> BridgePredictor::acquire() const {
  {
    std::lock_guard lock(mu_);
    if (!idle_.empty()) {
      auto conn = std::move(idle_.back());
      idle_.pop_back();
      return conn;
    }
  }
  return std::make_unique<Connection>(endpoint_, timeout_);
}

void BridgePredictor::release(std::unique_ptr<Connection> conn) const {
  std::lock_guard lock(mu_);
  if (conn->broken() || idle_.size() >= pool_size_) {
    retired_requests_ += conn->requests_sent();
    return;
  }
  idle_.push_back(std::move(conn));
}

std::vector<double> BridgePredictor::evaluate(std::span<const InputTensor> batch) const {
  auto conn = acquire();
  try {
    auto losses = conn->evaluate(batch);
    release(std::move(conn));
    return losses;
  } catch (...) {
    release(std::move(conn));
    throw;
  }
}

std::uint64_t BridgePredictor::requests_sent() const {
  std::lock_guard lock(mu_);
  std::uint64_t total = retired_requests_;
  for (const auto& c : idle_) total += c->requests_sent();
  return total;
}

bool ConformanceReport::conformant() const {
  if (checks.empty()) return false;
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

nlohmann::json ConformanceReport::to_json() const {
  nlohmann::json j;
  j["status"] = conformant() ? "conformant" : "nonconformant";
  j["max_batch"] = max_batch;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  return j;
}

std::vector<std::uint8_t> golden_eval_request() {
  const std::vector<InputTensor> batch{InputTensor::from({1}, {0.0f})};
  return encode_eval_request(0, batch);
}

namespace {

template <typename Fn>
void run_check(ConformanceReport& report, const std::string& name, Fn&& fn) {
  ConformanceCheck check{name, false, {}};
  try {
    check.detail = fn();
    check.passed = true;
  } catch (const std::exception& e) {
    check.detail = e.what();
  }
  report.checks.push_back(std::move(check));
}

void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::kProtocolError, what);
}

}  // namespace

ConformanceReport check_conformance(const Endpoint& endpoint, bool echo, std::chrono::milliseconds timeout) {
  ConformanceReport report;
  std::unique_ptr<Connection> conn;

  run_check(report, "handshake", [&] {
    conn = std::make_unique<Connection>(endpoint, timeout);
    report.max_batch = conn->max_batch();
    return "max_batch=" + std::to_string(conn->max_batch());
  });
  if (!conn) return report;

  run_check(report, "golden_eval_request", [&] {
    const Frame reply = conn->exchange(golden_eval_request());
    require(reply.type == FrameType::kEvalResponse, "expected EvalResponse");
    require(reply.request_id == 0, "request id not echoed");
    const auto losses = decode_eval_response(reply, 1);
    require(std::isfinite(losses[0]) && losses[0] >= 0.0, "loss not finite and nonnegative");
    if (echo) require(losses[0] == 0.0, "echo of a zero tensor must be 0");
    return "loss=" + std::to_string(losses[0]);
  });

  run_check(report, "request_id_roundtrip", [&] {
    const std::uint64_t id = 0x0123456789ABCDEFULL;
    const std::vector<InputTensor> batch{InputTensor::from({2}, {1.0f, 2.0f})};
    const Frame reply = conn->exchange(encode_eval_request(id, batch));
    require(reply.request_id == id, "request id not echoed");
    decode_eval_response(reply, 1);
    return std::string("ok");
  });

  if (echo) {
    run_check(report, "echo_sums", [&] {
      CounterRng rng(7341, 0);
      std::vector<InputTensor> batch;
      for (int i = 0; i < 50; ++i) {
        InputTensor t = InputTensor::zeros({3, 5});
        for (auto& v : t.data()) v = static_cast<float>(rng.uniform() * 10.0);
        batch.push_back(std::move(t));
      }
      const auto losses = conn->evaluate(batch);
      double worst = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i) worst = std::max(worst, std::abs(losses[i] - echo_loss(batch[i])));
      require(worst <= 1e-12, "echo sum off by " + std::to_string(worst));
      return "max_abs_diff=" + std::to_string(worst);
    });
  }

  if (report.max_batch < 0xFFFF) {
    run_check(report, "oversized_batch_rejected", [&] {
      std::vector<InputTensor> batch(report.max_batch + 1, InputTensor::from({1}, {0.0f}));
      const Frame reply = conn->exchange(encode_eval_request(9, batch));
      require(reply.type == FrameType::kError, "expected an Error frame for batch of " + std::to_string(batch.size()));
      return decode_error(reply);
    });
  }

  run_check(report, "malformed_frame_rejected", [&] {
    Connection fresh(endpoint, std::min(timeout, std::chrono::milliseconds(5000)));
    auto bad = golden_eval_request();
    bad[4] = 'X';
    const Frame reply = fresh.exchange(bad);
    require(reply.type == FrameType::kError, "expected an Error frame for bad magic");
    const std::string text = decode_error(reply);
    try {
      fresh.receive_frame();
    } catch (const Error& e) {
      require(e.kind() == ErrorKind::kConnectionLost, std::string("expected close, got ") + e.what());
      return text;
    }
    fail(ErrorKind::kProtocolError, "server kept the connection open after a malformed frame");
  });

  return report;
}

}  // namespace mupax::bridge
