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

#include "loopback_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "mupax/models.hpp"

namespace mupax::testing {

namespace {

bool read_exact(int fd, std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::recv(fd, out + got, n - got, 0);
    if (r <= 0) return false;
    got += static_cast<std::size_t>(r);
  }
  return true;
}

void write_all(int fd, const std::vector<std::uint8_t>& bytes) {
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t n = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return;
    sent += static_cast<std::size_t>(n);
  }
}

std::vector<double> echo_handler(const std::vector<InputTensor>& batch) {
  std::vector<double> out;
  for (const auto& t : batch) out.push_back(echo_loss(t));
  return out;
}

}  // namespace

LoopbackServer::LoopbackServer(ServerOptions options) : options_(std::move(options)) {
  if (!options_.handler) options_.handler = echo_handler;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket failed");
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
    ::close(listen_fd_);
    throw std::runtime_error("bind/listen failed");
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

LoopbackServer::~LoopbackServer() { stop(); }

void LoopbackServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : workers_) {
    if (t.joinable()) t.join();
  }
}

void LoopbackServer::accept_loop() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_) return;
      continue;
    }
    ++connections_;
    std::lock_guard lock(mu_);
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void LoopbackServer::serve(int fd) {
  using namespace mupax::bridge;
  for (;;) {
    std::vector<std::uint8_t> buf(4);
    if (!read_exact(fd, buf.data(), 4)) break;
    std::uint32_t length = 0;
    std::memcpy(&length, buf.data(), 4);
    if (length < kFrameHeaderLength - 4 || length > (1u << 26)) {
      write_all(fd, encode_error(0, "bad frame length"));
      break;
    }
    buf.resize(4 + length);
    if (!read_exact(fd, buf.data() + 4, length)) break;

    Frame frame;
    try {
      frame = decode_frame(buf);
    } catch (const std::exception& e) {
      write_all(fd, encode_error(0, e.what()));
      break;
    }

    if (frame.type == FrameType::kHello) {
      write_all(fd, encode_hello_ack(frame.request_id, options_.max_batch));
      if (options_.drop_after_hello) break;
      continue;
    }
    if (frame.type != FrameType::kEvalRequest) {
      write_all(fd, encode_error(frame.request_id, "unexpected frame type"));
      break;
    }
    std::vector<InputTensor> batch;
    try {
      batch = decode_eval_request(frame);
    } catch (const std::exception& e) {
      write_all(fd, encode_error(frame.request_id, e.what()));
      break;
    }
    ++eval_requests_;
    if (batch.size() > options_.max_batch) {
      write_all(fd, encode_error(frame.request_id, "batch too large"));
      continue;
    }
    std::vector<double> losses;
    try {
      losses = options_.handler(batch);
    } catch (const std::exception& e) {
      write_all(fd, encode_error(frame.request_id, e.what()));
      continue;
    }
    std::vector<EvalItem> items;
    for (std::size_t i = 0; i < losses.size(); ++i) items.push_back({static_cast<std::uint16_t>(i), losses[i]});
    if (options_.reverse_items) std::reverse(items.begin(), items.end());
    if (options_.delay.count() > 0) std::this_thread::sleep_for(options_.delay);
    const std::uint64_t id = options_.wrong_id ? frame.request_id + 1 : frame.request_id;
    write_all(fd, encode_eval_response(id, items));
  }
  ::shutdown(fd, SHUT_RDWR);
  std::lock_guard lock(mu_);
  client_fds_.erase(std::remove(client_fds_.begin(), client_fds_.end(), fd), client_fds_.end());
  ::close(fd);
}

}  // namespace mupax::testing
