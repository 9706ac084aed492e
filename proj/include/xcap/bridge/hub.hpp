#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "xcap/bridge/wire.hpp"

namespace xcap::bridge {

using ClientId = std::uint64_t;

/// Outbound queue of one connection. Telemetry beyond the limit drops the
/// oldest telemetry entry; other messages are never dropped.
class ClientQueue {
 public:
  explicit ClientQueue(std::size_t telemetry_limit) : limit_(telemetry_limit) {}

  void push(WireMessage m);
  /// Blocks up to timeout; nullopt on timeout or once closed and drained.
  std::optional<WireMessage> pop(std::chrono::milliseconds timeout);
  void close();
  [[nodiscard]] bool closed() const;
  [[nodiscard]] std::size_t dropped() const;
  [[nodiscard]] std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<WireMessage> q_;
  std::size_t telemetry_ = 0;
  std::size_t limit_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
};

struct Inbound {
  ClientId from = 0;
  WireMessage msg;
};

struct Connection {
  ClientId id = 0;
  bool is_operator = false;
  std::shared_ptr<ClientQueue> queue;
};

/// Fan-out point between the session loop and the connections. Stamps every
/// outbound message from one daemon-wide sequence, so each connection sees
/// strictly increasing seq values.
class Hub {
 public:
  explicit Hub(std::size_t telemetry_limit = 256) : limit_(telemetry_limit) {}

  /// Registers a connection and queues Hello plus the latest StateUpdate.
  /// The first connection while no operator is present becomes the operator.
  Connection connect();
  /// Registers an in-process operator with no queue (takes the operator slot).
  ClientId connect_local_operator();
  void disconnect(ClientId id);
  [[nodiscard]] bool is_operator(ClientId id) const;
  [[nodiscard]] std::size_t connections() const;

  /// Sends to one client, or to every client when `to` is empty. Returns seq.
  std::uint64_t publish(MessageType type, nlohmann::json payload, std::optional<ClientId> to = std::nullopt);
  [[nodiscard]] nlohmann::json last_state() const;

  /// Inbound commands. Non-increasing seq per client is answered with Error
  /// and not queued.
  void submit(ClientId from, WireMessage m);
  std::vector<Inbound> drain();

 private:
  std::uint64_t publish_locked(MessageType type, nlohmann::json payload, std::optional<ClientId> to);

  mutable std::mutex mu_;
  std::size_t limit_;
  std::uint64_t next_seq_ = 1;
  ClientId next_client_ = 1;
  std::map<ClientId, std::shared_ptr<ClientQueue>> clients_;
  std::map<ClientId, std::uint64_t> last_inbound_;
  std::optional<ClientId> operator_;
  nlohmann::json last_state_;
  std::deque<Inbound> inbox_;
};

}  // namespace xcap::bridge
