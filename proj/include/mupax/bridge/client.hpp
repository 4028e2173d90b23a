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

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mupax/bridge/frame.hpp"
#include "mupax/predictor.hpp"

namespace mupax::bridge {

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;

  /// "host:port" or "host" (default port).
  static Endpoint parse(const std::string& text);
  std::string to_string() const;
};

inline constexpr std::chrono::milliseconds kDefaultTimeout{30000};

/// MUPAX_BRIDGE_TIMEOUT_MS if set to a positive integer, else 30 s.
std::chrono::milliseconds timeout_from_env();

/// Blocking TCP connection speaking one request at a time.
class Connection {
 public:
  /// Connects and performs the Hello/HelloAck handshake.
  Connection(const Endpoint& endpoint, std::chrono::milliseconds timeout);
  ~Connection();
  Connection(const Connection&) = delete;
  Connection& operator=(const Connection&) = delete;

  std::uint32_t max_batch() const noexcept { return max_batch_; }

  /// Losses in batch order. Batches larger than max_batch() go out as
  /// several requests, one after another.
  std::vector<double> evaluate(std::span<const InputTensor> batch);

  /// Sends raw bytes and reads one frame back. Used by the conformance check
  /// to push hand-built frames.
  Frame exchange(std::span<const std::uint8_t> bytes);

  void send_bytes(std::span<const std::uint8_t> bytes);
  Frame receive_frame();

  /// Set after any transport or protocol failure; a broken connection is
  /// never reused.
  bool broken() const noexcept { return fd_ < 0; }
  std::uint64_t requests_sent() const noexcept { return requests_; }

 private:
  void close_socket() noexcept;
  void read_exact(std::uint8_t* out, std::size_t n);
  std::vector<double> evaluate_chunk(std::span<const InputTensor> batch);

  int fd_ = -1;
  std::chrono::milliseconds timeout_;
  std::chrono::steady_clock::time_point deadline_;
  std::uint32_t max_batch_ = 0;
  std::uint64_t next_id_ = 1;
  std::uint64_t requests_ = 0;
};

/// One-shot convenience: connect, handshake, evaluate, disconnect.
std::vector<double> eval_over_bridge(const Endpoint& endpoint, std::span<const InputTensor> batch,
                                     std::chrono::milliseconds timeout = timeout_from_env());

/// Predictor backed by a remote model. Holds up to `pool_size` connections so
/// concurrent workers each get their own; no automatic retries.
class BridgePredictor final : public Predictor {
 public:
  BridgePredictor(Endpoint endpoint, Shape input_shape, std::size_t pool_size,
                  std::chrono::milliseconds timeout = timeout_from_env());

  std::vector<double> evaluate(std::span<const InputTensor> batch) const override;
  const Shape& input_shape() const override { return shape_; }
  std::string description() const override { return "bridge:" + endpoint_.to_string(); }
  std::size_t max_concurrency() const override { return pool_size_; }

  /// Total EvalRequest frames sent through this predictor.
  std::uint64_t requests_sent() const;

 private:
  std::unique_ptr<Connection> acquire() const;
  void release(std::unique_ptr<Connection> conn) const;

  Endpoint endpoint_;
  Shape shape_;
  std::size_t pool_size_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mu_;
  mutable std::vector<std::unique_ptr<Connection>> idle_;
  mutable std::uint64_t retired_requests_ = 0;
};

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;
  std::uint32_t max_batch = 0;

  bool conformant() const;
  nlohmann::json to_json() const;
};

/// The golden single-tensor request: id 0, one [1]-shaped tensor holding 0.
std::vector<std::uint8_t> golden_eval_request();

/// Runs the golden-frame checks against a live server. With `echo` set the
/// server is also expected to return the sum of each tensor's values.
ConformanceReport check_conformance(const Endpoint& endpoint, bool echo,
                                    std::chrono::milliseconds timeout = timeout_from_env());

}  // namespace mupax::bridge
