#include "edgebench/netem_proxy.hpp"

namespace edgebench {

namespace {

constexpr std::size_t kChunkBytes = 16 * 1024;

LinkProfile without_loss(LinkProfile profile) {
  profile.random_loss_pct = 0;
  return profile;
}

}  // namespace

NetemProxy::NetemProxy(std::uint16_t listen_port, std::string upstream_host,
                       std::uint16_t upstream_port, const LinkProfile& forward,
                       const LinkProfile& reverse)
    : upstream_host_(std::move(upstream_host)),
      upstream_port_(upstream_port),
      forward_(without_loss(forward)),
      reverse_(without_loss(reverse)),
      listener_(listen_port),
      epoch_(std::chrono::steady_clock::now()) {
  accept_thread_ = std::thread([this] { accept_loop(); });
}

NetemProxy::~NetemProxy() { stop(); }

double NetemProxy::now_ms() const {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - epoch_)
      .count();
}

void NetemProxy::accept_loop() {
  while (!stopping_.load()) {
    std::optional<Socket> client = listener_.accept_client();
    if (!client.has_value()) break;
    auto conn = std::make_shared<Conn>();
    try {
      conn->upstream = std::make_shared<Socket>(connect_to(upstream_host_, upstream_port_));
    } catch (const std::exception&) {
      continue;  // upstream gone; drop the client
    }
    client->set_nodelay();
    conn->upstream->set_nodelay();
    conn->client = std::make_shared<Socket>(std::move(*client));

    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_.load()) {
      conn->client->shutdown_both();
      conn->upstream->shutdown_both();
      break;
    }
    conns_.push_back(conn);
    threads_.emplace_back(
        [this, conn] { reader(conn, conn->client, forward_, conn->to_upstream, forward_chunks_); });
    threads_.emplace_back([this, conn] { delayer(conn, conn->upstream, conn->to_upstream); });
    threads_.emplace_back(
        [this, conn] { reader(conn, conn->upstream, reverse_, conn->to_client, reverse_chunks_); });
    threads_.emplace_back([this, conn] { delayer(conn, conn->client, conn->to_client); });
  }
}

void NetemProxy::reader(std::shared_ptr<Conn> conn, std::shared_ptr<Socket> src, Direction& dir,
                        PumpQueue& queue, std::atomic<std::uint64_t>& counter) {
  (void)conn;  // held only to keep the connection alive for the thread
  std::vector<std::uint8_t> buf(kChunkBytes);
  bool eof = false;
  while (!stopping_.load() && !eof) {
    std::optional<std::size_t> got;
    try {
      got = src->recv_some(buf.data(), buf.size(), 200);
    } catch (const std::exception&) {
      eof = true;
    }
    if (!eof) {
      if (!got.has_value()) continue;  // poll timeout; check the stop flag
      if (*got == 0) {
        eof = true;
      } else {
        Chunk chunk;
        chunk.data.assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(*got));
        const double sent_at = now_ms();
        {
          std::lock_guard<std::mutex> lock(dir.mu);
          // Loss is zeroed for live links, so the offer always schedules.
          chunk.deliver_at_ms = dir.state.offer(*got, sent_at).value_or(sent_at);
        }
        counter.fetch_add(1);
        std::lock_guard<std::mutex> lock(queue.mu);
        queue.items.push_back(std::move(chunk));
        queue.cv.notify_one();
      }
    }
  }
  // EOF marker delivers after everything queued ahead of it.
  std::lock_guard<std::mutex> lock(queue.mu);
  queue.items.push_back(Chunk{});
  queue.cv.notify_one();
}

void NetemProxy::delayer(std::shared_ptr<Conn> conn, std::shared_ptr<Socket> dst,
                         PumpQueue& queue) {
  (void)conn;  // held only to keep the connection alive for the thread
  while (true) {
    Chunk chunk;
    {
      std::unique_lock<std::mutex> lock(queue.mu);
      queue.cv.wait(lock, [&] { return !queue.items.empty() || stopping_.load(); });
      if (queue.items.empty()) return;  // stopping with nothing left to flush
      chunk = std::move(queue.items.front());
      queue.items.pop_front();
    }
    if (chunk.data.empty()) {
      // Propagate the close; the opposite reader sees EOF and cascades.
      dst->shutdown_both();
      return;
    }
    if (!stopping_.load()) {
      const auto deliver_at =
          epoch_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double, std::milli>(chunk.deliver_at_ms));
      std::this_thread::sleep_until(deliver_at);
    }
    if (!dst->send_all(chunk.data.data(), chunk.data.size())) {
      return;  // receiver hung up; its own reader handles the cascade
    }
  }
}

void NetemProxy::stop() {
  if (!stopping_.exchange(true)) {
    listener_.close();
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& conn : conns_) {
      conn->client->shutdown_both();
      conn->upstream->shutdown_both();
      conn->to_upstream.cv.notify_all();
      conn->to_client.cv.notify_all();
    }
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> threads;
  {
    std::lock_guard<std::mutex> lock(mu_);
    threads.swap(threads_);
  }
  for (std::thread& t : threads) {
    if (t.joinable()) t.join();
  }
  std::lock_guard<std::mutex> lock(mu_);
  conns_.clear();
}

}  // namespace edgebench
