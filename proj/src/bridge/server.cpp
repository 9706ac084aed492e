#include "xcap/bridge/server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "xcap/error.hpp"

namespace xcap::bridge {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

bool send_all(int fd, const std::uint8_t* data, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
  return true;
}

sockaddr_in resolve(const std::string& host, int port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  const std::string h = host.empty() || host == "localhost" ? "127.0.0.1" : host;
  if (::inet_pton(AF_INET, h.c_str(), &addr.sin_addr) != 1) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (::getaddrinfo(h.c_str(), nullptr, &hints, &res) != 0 || res == nullptr)
      throw IoError("cannot resolve host '" + host + "'");
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    ::freeaddrinfo(res);
  }
  return addr;
}

}  // namespace

struct TcpServer::Session {
  int fd = -1;
  Connection conn;
  std::thread reader;
  std::thread writer;
  std::atomic<bool> done{false};
};

TcpServer::TcpServer(std::shared_ptr<Hub> hub) : hub_(std::move(hub)) {
  if (!hub_) throw ArgumentError("tcp server: hub required");
}

TcpServer::~TcpServer() { stop(); }

int TcpServer::bind(const std::string& host, int port) {
  if (listen_fd_ >= 0) throw IoError("tcp server: already bound");
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw IoError(errno_text("socket"));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr = resolve(host, port);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
    const auto msg = errno_text("bind");
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw IoError(msg + " (" + host + ":" + std::to_string(port) + ")");
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  return port_;
}

void TcpServer::start() {
  if (listen_fd_ < 0) throw IoError("tcp server: bind first");
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::accept_loop() {
  while (running_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto s = std::make_shared<Session>();
    s->fd = fd;
    s->conn = hub_->connect();
    {
      std::lock_guard lock(mu_);
      // Reap finished sessions.
      std::erase_if(sessions_, [](const std::shared_ptr<Session>& old) {
        if (!old->done) return false;
        if (old->reader.joinable()) old->reader.join();
        if (old->writer.joinable()) old->writer.join();
        ::close(old->fd);
        return true;
      });
      sessions_.push_back(s);
    }
    serve(s);
  }
}

void TcpServer::serve(const std::shared_ptr<Session>& s) {
  s->writer = std::thread([this, s] {
    while (true) {
      auto m = s->conn.queue->pop(std::chrono::milliseconds(100));
      if (!m) {
        if (s->conn.queue->closed() || !running_) break;
        continue;
      }
      const auto bytes = encode_frame(*m);
      if (!send_all(s->fd, bytes.data(), bytes.size())) break;
    }
    ::shutdown(s->fd, SHUT_RDWR);
  });
  s->reader = std::thread([this, s] {
    FrameDecoder dec;
    std::uint8_t buf[16384];
    while (running_) {
      pollfd p{s->fd, POLLIN, 0};
      const int r = ::poll(&p, 1, 100);
      if (r == 0) continue;
      if (r < 0 && errno == EINTR) continue;
      const ssize_t n = r < 0 ? -1 : ::recv(s->fd, buf, sizeof buf, 0);
      if (n <= 0) break;
      dec.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
      try {
        while (auto m = dec.next()) hub_->submit(s->conn.id, std::move(*m));
      } catch (const ParseError& e) {
        hub_->publish(MessageType::Error, {{"message", std::string("bad frame: ") + e.what()}}, s->conn.id);
        break;
      }
    }
    hub_->disconnect(s->conn.id);
    s->conn.queue->close();
    s->done = true;
  });
}

void TcpServer::stop() {
  const bool was_running = running_.exchange(false);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mu_);
    sessions.swap(sessions_);
  }
  for (auto& s : sessions) {
    s->conn.queue->close();
    ::shutdown(s->fd, SHUT_RDWR);
    if (s->reader.joinable()) s->reader.join();
    if (s->writer.joinable()) s->writer.join();
    ::close(s->fd);
  }
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  (void)was_running;
}

TcpClient::~TcpClient() { close(); }

void TcpClient::connect(const std::string& host, int port) {
  close();
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw IoError(errno_text("socket"));
  sockaddr_in addr = resolve(host, port);
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    const auto msg = errno_text("connect");
    close();
    throw IoError(msg + " (" + host + ":" + std::to_string(port) + ")");
  }
  int one = 1;
  ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  decoder_ = FrameDecoder{};
}

void TcpClient::send(const WireMessage& m) {
  if (fd_ < 0) throw IoError("tcp client: not connected");
  const auto bytes = encode_frame(m);
  if (!send_all(fd_, bytes.data(), bytes.size())) throw IoError(errno_text("send"));
}

void TcpClient::send_raw(std::span<const std::uint8_t> bytes) {
  if (fd_ < 0) throw IoError("tcp client: not connected");
  if (!send_all(fd_, bytes.data(), bytes.size())) throw IoError(errno_text("send"));
}

std::optional<WireMessage> TcpClient::receive(std::chrono::milliseconds timeout) {
  if (fd_ < 0) throw IoError("tcp client: not connected");
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (auto m = decoder_.next()) return m;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    pollfd p{fd_, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) return std::nullopt;
    std::uint8_t buf[16384];
    const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
    if (n <= 0) throw IoError("tcp client: connection closed");
    decoder_.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(n)));
  }
}

std::optional<WireMessage> TcpClient::wait_for(MessageType type, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return std::nullopt;
    auto m = receive(left);
    if (!m) return std::nullopt;
    if (m->type == type) return m;
  }
}

void TcpClient::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace xcap::bridge
