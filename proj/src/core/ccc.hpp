// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The depcage authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing,
// software distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions
// and limitations under the License.

/**
 * @file ccc.hpp
 *
 * Remote command-and-control boundary: telemetry out, operator commands in,
 * over WebSocket text frames (see protocol.md), plus an HTTP health
 * endpoint. The tick loop only touches two queues: it publishes frames
 * (never blocks, drop-oldest per client) and drains accepted commands at
 * tick start.
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pipeline.hpp"
#include "reactor.hpp"
#include "records.hpp"

namespace depcage::ccc {

inline constexpr std::uint16_t kDefaultPort = 8700;
inline constexpr std::size_t kScoreHistory = 100;

/// Outbound FIFO of one client. Control entries (hello, acks) are never
/// dropped; at most `capacity` droppable entries (telemetry) are held, and a
/// new one evicts the oldest. Relative order of everything kept is preserved.
template <class T>
class OutboundQueue {
 public:
  explicit OutboundQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  /// Returns true when an older droppable entry was evicted.
  bool push_droppable(T value) {
    bool dropped = false;
    if (droppable_ == capacity_) {
      auto it = std::find_if(items_.begin(), items_.end(), [](const Entry& e) { return e.droppable; });
      items_.erase(it);
      --droppable_;
      dropped = true;
    }
    items_.push_back({std::move(value), true});
    ++droppable_;
    return dropped;
  }
  void push_control(T value) { items_.push_back({std::move(value), false}); }

  std::optional<T> pop() {
    if (items_.empty()) return std::nullopt;
    Entry e = std::move(items_.front());
    items_.pop_front();
    if (e.droppable) --droppable_;
    return std::move(e.value);
  }
  void clear() {
    items_.clear();
    droppable_ = 0;
  }
  std::size_t size() const { return items_.size(); }
  std::size_t droppable() const { return droppable_; }
  bool empty() const { return items_.empty(); }

 private:
  struct Entry {
    T value;
    bool droppable;
  };
  std::size_t capacity_;
  std::size_t droppable_{0};
  std::deque<Entry> items_;
};

/// Envelope {type, seq, tick, payload}.
std::string envelope(std::string_view type, std::uint64_t seq, std::int64_t tick, const Json& payload);

/// Telemetry payload for one tick.
Json telemetry_payload(const pipeline::TickFrame& frame, std::span<const double> score_history);

/// Validates inbound commands before they reach the reactor: parse errors,
/// duplicate ids (rejected idempotently) and the resume handshake.
/// Thread-safe.
class CommandGate {
 public:
  reactor::CommandResult submit(const Json& payload);
  /// Latest mode seen by the vehicle.
  void observe(const reactor::SystemMode& mode);
  /// Accepted commands in arrival order; clears the queue.
  std::vector<reactor::OperatorCommand> drain();

 private:
  std::mutex mutex_;
  std::set<std::string> seen_ids_;
  std::vector<reactor::OperatorCommand> pending_;
  reactor::SystemMode mode_;
  bool ack_pending_{false};  // ack_handover accepted but not yet applied
};

struct ServiceConfig {
  std::string host{"127.0.0.1"};
  std::uint16_t port{kDefaultPort};  // 0 picks a free port
  std::string token{"depcage"};
  std::size_t client_queue{8};
  std::size_t max_message_bytes{1 << 22};
};

class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::uint16_t port() const;
  void set_run_id(const std::string& run_id);

  /// Non-blocking; called from the tick loop.
  void publish(const pipeline::TickFrame& frame);
  std::vector<reactor::OperatorCommand> drain_commands();
  std::size_t client_count() const;
  CommandGate& gate();

  /// Hooks for run_scenario.
  pipeline::RunHooks hooks();

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace depcage::ccc
