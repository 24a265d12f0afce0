#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace edgebench {

// Thin RAII wrapper over a connected socket fd. Move-only.
class Socket {
public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void close();

  // Shut down both directions without closing the fd (wakes blocked reads).
  void shutdown_both();

  bool send_all(const void* data, std::size_t len);
  // False on clean EOF before any byte; throws on mid-message EOF or error.
  bool recv_all(void* data, std::size_t len);
  // recv with a deadline: nullopt on timeout, 0 on EOF, else byte count.
  std::optional<std::size_t> recv_some(void* data, std::size_t len, int timeout_ms);

  void set_recv_timeout_ms(int timeout_ms);
  void set_nodelay();

private:
  int fd_ = -1;
};

// Connects to host:port; throws std::runtime_error after the retry budget.
Socket connect_to(const std::string& host, std::uint16_t port, int attempts = 50,
                  int retry_delay_ms = 100);

struct ParsedAddress {
  std::string host;
  std::uint16_t port = 0;
};
ParsedAddress parse_address(const std::string& address);  // "host:port"

class Listener {
public:
  // port 0 binds an ephemeral port; bound_port() reports the real one.
  explicit Listener(std::uint16_t port);
  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  std::uint16_t bound_port() const { return port_; }
  // nullopt once the listener was closed.
  std::optional<Socket> accept_client();
  void close();

private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace edgebench
