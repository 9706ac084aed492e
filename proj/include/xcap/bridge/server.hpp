#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "xcap/bridge/hub.hpp"
#include "xcap/bridge/wire.hpp"

namespace xcap::bridge {

inline constexpr int kDefaultPort = 8787;

/// Framed-JSON TCP endpoint for UI clients. Each connection gets a reader
/// thread (frames -> Hub::submit) and a writer thread (queue -> socket).
class TcpServer {
 public:
  explicit TcpServer(std::shared_ptr<Hub> hub);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  /// Binds and listens; port 0 picks an ephemeral port. Returns the port.
  int bind(const std::string& host, int port);
  /// Starts accepting on a background thread.
  void start();
  void stop();
  [[nodiscard]] int port() const { return port_; }

 private:
  struct Session;
  void accept_loop();
  void serve(const std::shared_ptr<Session>& s);

  std::shared_ptr<Hub> hub_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<std::shared_ptr<Session>> sessions_;
};

/// Blocking client used by tests and the CLI.
class TcpClient {
 public:
  TcpClient() = default;
  ~TcpClient();
  TcpClient(const TcpClient&) = delete;
  TcpClient& operator=(const TcpClient&) = delete;

  void connect(const std::string& host, int port);
  void send(const WireMessage& m);
  /// Writes bytes verbatim, framing included.
  void send_raw(std::span<const std::uint8_t> bytes);
  /// Next message, or nullopt on timeout. Throws IoError once the peer closed.
  std::optional<WireMessage> receive(std::chrono::milliseconds timeout);
  /// Reads until a message of `type` arrives (others are discarded).
  std::optional<WireMessage> wait_for(MessageType type, std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  FrameDecoder decoder_;
};

}  // namespace xcap::bridge
