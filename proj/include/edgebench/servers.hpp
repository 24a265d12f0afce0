#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "edgebench/cloud.hpp"
#include "edgebench/edge_broker.hpp"
#include "edgebench/tcp.hpp"

namespace edgebench {

inline constexpr std::uint16_t kDefaultEdgePort = 5680;
inline constexpr std::uint16_t kDefaultCloudPort = 5690;

// TCP front end for an EdgeBrokerCore. Request/response for publish and
// stats; a SUBSCRIBE switches its connection into push mode until the broker
// shuts down or the client hangs up.
class EdgeBrokerServer {
public:
  EdgeBrokerServer(EdgeBrokerCore& broker, std::uint16_t port);
  ~EdgeBrokerServer();
  EdgeBrokerServer(const EdgeBrokerServer&) = delete;
  EdgeBrokerServer& operator=(const EdgeBrokerServer&) = delete;

  std::uint16_t port() const { return listener_.bound_port(); }
  // Stops accepting, shuts the broker down, unblocks handlers, joins.
  void stop();
  // Blocks until a client sent SHUTDOWN_SERVER (process mode).
  void wait();

private:
  void accept_loop();
  void serve(std::shared_ptr<Socket> sock);
  void initiate_stop();
  void drop_connection(const std::shared_ptr<Socket>& sock);

  EdgeBrokerCore& broker_;
  Listener listener_;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<std::thread> handlers_;
  std::vector<std::shared_ptr<Socket>> connections_;
  // Subscription streams say goodbye themselves (shutdown notice), so
  // initiate_stop must not yank their sockets like plain request sockets.
  std::vector<std::shared_ptr<Socket>> stream_connections_;
};

// TCP front end for the cloud side: append-only log plus the MEC registry.
// Strictly request/response; consumers poll FETCH.
class CloudServer {
public:
  CloudServer(CloudLogCore& log, Registry& registry, std::uint16_t port);
  ~CloudServer();
  CloudServer(const CloudServer&) = delete;
  CloudServer& operator=(const CloudServer&) = delete;

  std::uint16_t port() const { return listener_.bound_port(); }
  void stop();
  void wait();

private:
  void accept_loop();
  void serve(std::shared_ptr<Socket> sock);
  void initiate_stop();
  void drop_connection(const std::shared_ptr<Socket>& sock);

  CloudLogCore& log_;
  Registry& registry_;
  Listener listener_;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<std::thread> handlers_;
  std::vector<std::shared_ptr<Socket>> connections_;
};

}  // namespace edgebench
