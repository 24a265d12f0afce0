#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgebench/cloud.hpp"
#include "edgebench/edge_broker.hpp"
#include "edgebench/message.hpp"
#include "edgebench/tcp.hpp"

namespace edgebench {

// Peer vanished where a reply was still owed.
struct ConnectionClosed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BrokerWireStats {
  std::uint64_t accepted = 0;
  std::uint64_t dropped = 0;
  std::uint64_t depth = 0;
};

// One TCP connection to an edge broker. Request/response calls may share a
// connection; subscribe() dedicates the connection to its push stream, after
// which only next_delivery() is meaningful.
class BrokerClient {
public:
  BrokerClient(const std::string& host, std::uint16_t port);

  PublishResult publish(const std::string& topic, const CitsMessage& msg);
  BrokerWireStats stats(const std::string& topic);
  void report_stats(const std::string& topic, std::uint64_t accepted, std::uint64_t dropped,
                    std::uint64_t depth);
  void request_shutdown();  // stops the whole server

  void subscribe(const std::string& topic);
  enum class DeliveryStatus { Message, Timeout, Shutdown, Closed };
  DeliveryStatus next_delivery(CitsMessage& out, int timeout_ms);

  void close();

private:
  std::mutex mu_;
  Socket sock_;
  bool subscribed_ = false;
};

// One TCP connection to the cloud server (log + registry). Request/response
// only; poll fetch() for new records.
class CloudClient {
public:
  CloudClient(const std::string& host, std::uint16_t port);

  std::optional<std::uint64_t> append(const std::string& topic, const CitsMessage& msg);
  // Mirrors CloudLogCore::fetch, rethrowing NotFoundError / RangeError.
  std::vector<LogRecord> fetch(const std::string& topic, std::uint64_t from_offset,
                               std::uint32_t max_count);
  RegistryEntry resolve_producer(const std::optional<std::string>& requested_mec);
  ConsumerRoute resolve_consumer(const std::string& mec_id, const std::string& data_type);
  bool register_mec(const RegistryEntry& entry);  // false when mec_id already taken
  void set_cloud_address(const std::string& address);
  CloudTopicStats stats(const std::string& topic);
  void request_shutdown();

  void close();

private:
  std::uint8_t request_status(const std::vector<std::uint8_t>& body);
  std::mutex mu_;
  Socket sock_;
};

}  // namespace edgebench
