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

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "mupax/bridge/frame.hpp"

namespace mupax::testing {

using BatchHandler = std::function<std::vector<double>(const std::vector<InputTensor>&)>;

struct ServerOptions {
  std::uint32_t max_batch = 8;
  BatchHandler handler;                   // defaults to echo sums
  bool reverse_items = false;             // answer items in reverse order
  bool wrong_id = false;                  // answer with request_id + 1
  bool drop_after_hello = false;          // close right after HelloAck
  std::chrono::milliseconds delay{0};     // before each EvalResponse
};

/// In-process TCP server on 127.0.0.1 with an ephemeral port, speaking the
/// bridge protocol. One thread per connection.
class LoopbackServer {
 public:
  explicit LoopbackServer(ServerOptions options = {});
  ~LoopbackServer();
  LoopbackServer(const LoopbackServer&) = delete;
  LoopbackServer& operator=(const LoopbackServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  std::uint64_t eval_requests() const noexcept { return eval_requests_.load(); }
  std::uint64_t connections() const noexcept { return connections_.load(); }

  void stop();

 private:
  void accept_loop();
  void serve(int fd);

  ServerOptions options_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> eval_requests_{0};
  std::atomic<std::uint64_t> connections_{0};
  std::mutex mu_;
  std::vector<int> client_fds_;
  std::vector<std::thread> workers_;
  std::thread acceptor_;
};

}  // namespace mupax::testing
