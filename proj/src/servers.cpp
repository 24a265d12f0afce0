#include "edgebench/servers.hpp"

#include <chrono>

#include "edgebench/wire.hpp"

namespace edgebench {

namespace {

bool send_raw(Socket& sock, const std::vector<std::uint8_t>& bytes) {
  return sock.send_all(bytes.data(), bytes.size());
}

bool send_status(Socket& sock, std::uint8_t status) { return sock.send_all(&status, 1); }

}  // namespace

// ---------------------------------------------------------------- edge side

EdgeBrokerServer::EdgeBrokerServer(EdgeBrokerCore& broker, std::uint16_t port)
    : broker_(broker), listener_(port) {
  accept_thread_ = std::thread([this] { accept_loop(); });
}

EdgeBrokerServer::~EdgeBrokerServer() { stop(); }

void EdgeBrokerServer::accept_loop() {
  while (!stopping_.load()) {
    std::optional<Socket> client = listener_.accept_client();
    if (!client.has_value()) break;
    client->set_nodelay();
    auto shared = std::make_shared<Socket>(std::move(*client));
    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_.load()) {
      shared->shutdown_both();
      break;
    }
    connections_.push_back(shared);
    handlers_.emplace_back([this, shared] { serve(shared); });
  }
}

void EdgeBrokerServer::serve(std::shared_ptr<Socket> sock) {
  try {
    while (!stopping_.load()) {
      std::optional<std::vector<std::uint8_t>> frame = wire::read_frame(*sock);
      if (!frame.has_value()) break;
      wire::Reader reader(*frame);
      const std::uint8_t command = reader.u8();
      switch (command) {
        case wire::kPublish: {
          const std::string topic = reader.string8();
          CitsMessage msg = decode_message(reader.rest());
          const PublishResult result = broker_.publish(topic, std::move(msg));
          const std::uint8_t status =
              result == PublishResult::Accepted ? wire::kStatusOk : wire::kStatusRejected;
          if (!send_status(*sock, status)) throw std::runtime_error("ack send failed");
          break;
        }
        case wire::kSubscribe: {
          const std::string topic = reader.string8();
          {
            // Reclassify: the stream ends via the broker's shutdown signal
            // (notice sent, then hang up), not via a forced socket close.
            std::lock_guard<std::mutex> lock(mu_);
            for (auto it = connections_.begin(); it != connections_.end(); ++it) {
              if (*it == sock) {
                connections_.erase(it);
                break;
              }
            }
            stream_connections_.push_back(sock);
          }
          const EdgeBrokerCore::SubscriberId id = broker_.subscribe(topic);
          CitsMessage msg;
          bool client_alive = true;
          while (client_alive) {
            const EdgeBrokerCore::WaitStatus status =
                broker_.next(topic, id, msg, std::chrono::milliseconds(100));
            if (status == EdgeBrokerCore::WaitStatus::Message) {
              client_alive = wire::write_frame(*sock, wire::build_deliver(msg));
            } else if (status == EdgeBrokerCore::WaitStatus::Shutdown) {
              wire::write_frame(*sock, wire::build_shutdown_notice());
              client_alive = false;
            }
          }
          broker_.unsubscribe(topic, id);
          drop_connection(sock);
          return;  // connection is dedicated to the subscription
        }
        case wire::kStats: {
          const std::string topic = reader.string8();
          const TopicStats stats = broker_.stats(topic);
          std::vector<std::uint8_t> reply;
          wire::put_u64(reply, stats.accepted);
          wire::put_u64(reply, stats.rejected);
          wire::put_u64(reply, stats.depth);
          if (!send_raw(*sock, reply)) throw std::runtime_error("stats send failed");
          break;
        }
        case wire::kReportStats: {
          const std::string topic = reader.string8();
          const std::uint64_t accepted = reader.u64();
          const std::uint64_t dropped = reader.u64();
          const std::uint64_t depth = reader.u64();
          broker_.report_external_stats(topic, accepted, dropped, depth);
          if (!send_status(*sock, wire::kStatusOk)) throw std::runtime_error("ack send failed");
          break;
        }
        case wire::kShutdownServer: {
          send_status(*sock, wire::kStatusOk);
          initiate_stop();
          drop_connection(sock);
          return;
        }
        default:
          // Unknown command: the reply shape would be undefined, so hang up.
          drop_connection(sock);
          return;
      }
    }
  } catch (const std::exception&) {
    // Torn frame or dead peer; nothing to salvage on this connection.
  }
  drop_connection(sock);
}

void EdgeBrokerServer::drop_connection(const std::shared_ptr<Socket>& sock) {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto it = connections_.begin(); it != connections_.end(); ++it) {
    if (*it == sock) {
      connections_.erase(it);
      return;
    }
  }
  for (auto it = stream_connections_.begin(); it != stream_connections_.end(); ++it) {
    if (*it == sock) {
      stream_connections_.erase(it);
      return;
    }
  }
}

void EdgeBrokerServer::initiate_stop() {
  if (stopping_.exchange(true)) return;
  // Streams are left open: the broker shutdown wakes their delivery loops,
  // which send the notice and close down on their own.
  broker_.shutdown();
  listener_.close();
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& conn : connections_) conn->shutdown_both();
}

void EdgeBrokerServer::stop() {
  initiate_stop();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> handlers;
  {
    std::lock_guard<std::mutex> lock(mu_);
    handlers.swap(handlers_);
  }
  for (std::thread& t : handlers) {
    if (t.joinable()) t.join();
  }
}

void EdgeBrokerServer::wait() {
  while (!stopping_.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

// --------------------------------------------------------------- cloud side

CloudServer::CloudServer(CloudLogCore& log, Registry& registry, std::uint16_t port)
    : log_(log), registry_(registry), listener_(port) {
  accept_thread_ = std::thread([this] { accept_loop(); });
}

CloudServer::~CloudServer() { stop(); }

void CloudServer::accept_loop() {
  while (!stopping_.load()) {
    std::optional<Socket> client = listener_.accept_client();
    if (!client.has_value()) break;
    client->set_nodelay();
    auto shared = std::make_shared<Socket>(std::move(*client));
    std::lock_guard<std::mutex> lock(mu_);
    if (stopping_.load()) {
      shared->shutdown_both();
      break;
    }
    connections_.push_back(shared);
    handlers_.emplace_back([this, shared] { serve(shared); });
  }
}

void CloudServer::serve(std::shared_ptr<Socket> sock) {
  try {
    while (!stopping_.load()) {
      std::optional<std::vector<std::uint8_t>> frame = wire::read_frame(*sock);
      if (!frame.has_value()) break;
      wire::Reader reader(*frame);
      const std::uint8_t command = reader.u8();
      switch (command) {
        case wire::kAppend: {
          const std::string topic = reader.string8();
          CitsMessage msg = decode_message(reader.rest());
          const std::optional<std::uint64_t> offset = log_.append(topic, std::move(msg));
          std::vector<std::uint8_t> reply;
          wire::put_u8(reply, offset.has_value() ? wire::kStatusOk : wire::kStatusRejected);
          wire::put_u64(reply, offset.value_or(0));
          if (!send_raw(*sock, reply)) throw std::runtime_error("append reply failed");
          break;
        }
        case wire::kFetch: {
          const std::string topic = reader.string8();
          const std::uint64_t from_offset = reader.u64();
          const std::uint32_t max_count = reader.u32();
          std::vector<std::uint8_t> reply;
          try {
            const std::vector<LogRecord> records = log_.fetch(topic, from_offset, max_count);
            wire::put_u8(reply, wire::kStatusOk);
            wire::put_u32(reply, static_cast<std::uint32_t>(records.size()));
            for (const LogRecord& rec : records) {
              wire::put_u64(reply, rec.offset);
              const std::vector<std::uint8_t> encoded = encode_message(rec.message);
              wire::put_u32(reply, static_cast<std::uint32_t>(encoded.size()));
              reply.insert(reply.end(), encoded.begin(), encoded.end());
            }
          } catch (const NotFoundError&) {
            reply.assign(1, wire::kStatusNotFound);
          } catch (const RangeError&) {
            reply.assign(1, wire::kStatusRange);
          }
          if (!send_raw(*sock, reply)) throw std::runtime_error("fetch reply failed");
          break;
        }
        case wire::kResolveProducer: {
          const bool has_preference = reader.u8() != 0;
          std::optional<std::string> mec;
          if (has_preference) mec = reader.string8();
          std::vector<std::uint8_t> reply;
          try {
            const RegistryEntry entry = registry_.resolve_producer(mec);
            wire::put_u8(reply, wire::kStatusOk);
            wire::put_string8(reply, entry.mec_id);
            wire::put_string8(reply, entry.broker_address);
            wire::put_string8(reply, entry.cloud_topic);
          } catch (const NotFoundError&) {
            reply.assign(1, wire::kStatusNotFound);
          } catch (const NoMecError&) {
            reply.assign(1, wire::kStatusNoMec);
          }
          if (!send_raw(*sock, reply)) throw std::runtime_error("resolve reply failed");
          break;
        }
        case wire::kResolveConsumer: {
          const std::string mec = reader.string8();
          const std::string data_type = reader.string8();
          const ConsumerRoute route = registry_.resolve_consumer(mec, data_type);
          std::vector<std::uint8_t> reply;
          wire::put_u8(reply, wire::kStatusOk);
          wire::put_string8(reply, route.cloud_topic);
          wire::put_string8(reply, route.cloud_address);
          if (!send_raw(*sock, reply)) throw std::runtime_error("resolve reply failed");
          break;
        }
        case wire::kSetCloudAddress: {
          registry_.set_cloud_address(reader.string8());
          if (!send_status(*sock, wire::kStatusOk)) throw std::runtime_error("set reply failed");
          break;
        }
        case wire::kRegisterMec: {
          RegistryEntry entry;
          entry.mec_id = reader.string8();
          entry.broker_address = reader.string8();
          entry.cloud_topic = reader.string8();
          std::uint8_t status = wire::kStatusOk;
          try {
            registry_.register_mec(entry);
          } catch (const std::invalid_argument&) {
            status = wire::kStatusRejected;
          }
          if (!send_status(*sock, status)) throw std::runtime_error("register reply failed");
          break;
        }
        case wire::kCloudStats: {
          const std::string topic = reader.string8();
          const CloudTopicStats stats = log_.stats(topic);
          std::vector<std::uint8_t> reply;
          wire::put_u8(reply, wire::kStatusOk);
          wire::put_u64(reply, stats.appended);
          wire::put_u64(reply, stats.rejected);
          wire::put_u64(reply, stats.next_offset);
          if (!send_raw(*sock, reply)) throw std::runtime_error("stats reply failed");
          break;
        }
        case wire::kShutdownServer: {
          send_status(*sock, wire::kStatusOk);
          initiate_stop();
          drop_connection(sock);
          return;
        }
        default:
          drop_connection(sock);
          return;
      }
    }
  } catch (const std::exception&) {
  }
  drop_connection(sock);
}

void CloudServer::drop_connection(const std::shared_ptr<Socket>& sock) {
  std::lock_guard<std::mutex> lock(mu_);
  for (auto it = connections_.begin(); it != connections_.end(); ++it) {
    if (*it == sock) {
      connections_.erase(it);
      break;
    }
  }
}

void CloudServer::initiate_stop() {
  if (stopping_.exchange(true)) return;
  listener_.close();
  std::lock_guard<std::mutex> lock(mu_);
  for (const auto& conn : connections_) conn->shutdown_both();
}

void CloudServer::stop() {
  initiate_stop();
  if (accept_thread_.joinable()) accept_thread_.join();
  std::vector<std::thread> handlers;
  {
    std::lock_guard<std::mutex> lock(mu_);
    handlers.swap(handlers_);
  }
  for (std::thread& t : handlers) {
    if (t.joinable()) t.join();
  }
}

void CloudServer::wait() {
  while (!stopping_.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
}

}  // namespace edgebench
