#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "edgebench/netem.hpp"
#include "edgebench/tcp.hpp"

namespace edgebench {

// TCP forwarder that imposes a link profile on each direction. Shaping works
// on raw byte chunks (no framing knowledge): a reader thread timestamps each
// chunk on arrival and books it through the shared LinkState, a delayer
// thread forwards it when its delivery time comes. All connections through
// the proxy share the two LinkStates, so they contend for the same modeled
// medium. Random loss is forced to zero here: dropping bytes out of a TCP
// stream would corrupt it, so loss modeling stays in the simulated pipeline.
class NetemProxy {
public:
  NetemProxy(std::uint16_t listen_port, std::string upstream_host, std::uint16_t upstream_port,
             const LinkProfile& forward, const LinkProfile& reverse);
  ~NetemProxy();
  NetemProxy(const NetemProxy&) = delete;
  NetemProxy& operator=(const NetemProxy&) = delete;

  std::uint16_t port() const { return listener_.bound_port(); }
  void stop();

  std::uint64_t forward_chunks() const { return forward_chunks_.load(); }
  std::uint64_t reverse_chunks() const { return reverse_chunks_.load(); }

private:
  struct Chunk {
    std::vector<std::uint8_t> data;  // empty = EOF marker
    double deliver_at_ms = 0.0;
  };

  struct PumpQueue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Chunk> items;
  };

  struct Direction {
    std::mutex mu;
    LinkState state;
    explicit Direction(const LinkProfile& profile) : state(profile) {}
  };

  struct Conn {
    std::shared_ptr<Socket> client;
    std::shared_ptr<Socket> upstream;
    PumpQueue to_upstream;
    PumpQueue to_client;
  };

  void accept_loop();
  void reader(std::shared_ptr<Conn> conn, std::shared_ptr<Socket> src, Direction& dir,
              PumpQueue& queue, std::atomic<std::uint64_t>& counter);
  void delayer(std::shared_ptr<Conn> conn, std::shared_ptr<Socket> dst, PumpQueue& queue);
  double now_ms() const;

  std::string upstream_host_;
  std::uint16_t upstream_port_;
  Direction forward_;
  Direction reverse_;
  Listener listener_;
  std::chrono::steady_clock::time_point epoch_;
  std::atomic<bool> stopping_{false};
  std::atomic<std::uint64_t> forward_chunks_{0};
  std::atomic<std::uint64_t> reverse_chunks_{0};
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<std::thread> threads_;
  std::vector<std::shared_ptr<Conn>> conns_;
};

}  // namespace edgebench
