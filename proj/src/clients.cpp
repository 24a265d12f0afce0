#include "edgebench/clients.hpp"

#include <chrono>

#include "edgebench/wire.hpp"

namespace edgebench {

namespace {

void send_frame_or_throw(Socket& sock, const std::vector<std::uint8_t>& body) {
  if (!wire::write_frame(sock, body)) {
    throw ConnectionClosed("request send failed");
  }
}

void recv_exact(Socket& sock, void* data, std::size_t len, const char* what) {
  if (!sock.recv_all(data, len)) {
    throw ConnectionClosed(std::string("connection closed awaiting ") + what);
  }
}

std::uint8_t recv_u8(Socket& sock, const char* what) {
  std::uint8_t v = 0;
  recv_exact(sock, &v, 1, what);
  return v;
}

std::uint32_t recv_u32(Socket& sock, const char* what) {
  std::uint8_t buf[4];
  recv_exact(sock, buf, 4, what);
  return (static_cast<std::uint32_t>(buf[0]) << 24) | (static_cast<std::uint32_t>(buf[1]) << 16) |
         (static_cast<std::uint32_t>(buf[2]) << 8) | static_cast<std::uint32_t>(buf[3]);
}

std::uint64_t recv_u64(Socket& sock, const char* what) {
  std::uint8_t buf[8];
  recv_exact(sock, buf, 8, what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | buf[i];
  return v;
}

std::string recv_string8(Socket& sock, const char* what) {
  const std::uint8_t len = recv_u8(sock, what);
  std::string s(len, '\0');
  if (len > 0) recv_exact(sock, s.data(), len, what);
  return s;
}

}  // namespace

// -------------------------------------------------------------- BrokerClient

BrokerClient::BrokerClient(const std::string& host, std::uint16_t port)
    : sock_(connect_to(host, port)) {
  sock_.set_nodelay();
}

PublishResult BrokerClient::publish(const std::string& topic, const CitsMessage& msg) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_publish(topic, msg));
  const std::uint8_t status = recv_u8(sock_, "publish ack");
  return status == wire::kStatusOk ? PublishResult::Accepted : PublishResult::Rejected;
}

BrokerWireStats BrokerClient::stats(const std::string& topic) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_stats(topic));
  BrokerWireStats out;
  out.accepted = recv_u64(sock_, "stats");
  out.dropped = recv_u64(sock_, "stats");
  out.depth = recv_u64(sock_, "stats");
  return out;
}

void BrokerClient::report_stats(const std::string& topic, std::uint64_t accepted,
                                std::uint64_t dropped, std::uint64_t depth) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_report_stats(topic, accepted, dropped, depth));
  recv_u8(sock_, "report ack");
}

void BrokerClient::request_shutdown() {
  std::lock_guard<std::mutex> lock(mu_);
  if (!wire::write_frame(sock_, wire::build_shutdown_server())) return;
  std::uint8_t ack = 0;
  sock_.recv_all(&ack, 1);  // best effort; the server is going away
}

void BrokerClient::subscribe(const std::string& topic) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_subscribe(topic));
  subscribed_ = true;
}

BrokerClient::DeliveryStatus BrokerClient::next_delivery(CitsMessage& out, int timeout_ms) {
  std::lock_guard<std::mutex> lock(mu_);
  if (!subscribed_) throw std::logic_error("next_delivery before subscribe");

  // Collect the 4-byte length under the deadline; the body follows at once.
  std::uint8_t len_buf[4];
  std::size_t have = 0;
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (have < 4) {
    const auto now = std::chrono::steady_clock::now();
    const int remaining =
        have == 0
            ? static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
                                   .count())
            : 1000;  // mid-frame: finish it regardless of the caller's deadline
    if (have == 0 && remaining <= 0) return DeliveryStatus::Timeout;
    const std::optional<std::size_t> got =
        sock_.recv_some(len_buf + have, 4 - have, remaining > 0 ? remaining : 1);
    if (!got.has_value()) {
      if (have == 0) return DeliveryStatus::Timeout;
      continue;
    }
    if (*got == 0) return DeliveryStatus::Closed;
    have += *got;
  }
  const std::uint32_t len = (static_cast<std::uint32_t>(len_buf[0]) << 24) |
                            (static_cast<std::uint32_t>(len_buf[1]) << 16) |
                            (static_cast<std::uint32_t>(len_buf[2]) << 8) |
                            static_cast<std::uint32_t>(len_buf[3]);
  if (len == 0 || len > wire::kMaxFrameBytes) {
    throw std::runtime_error("bad push frame length");
  }
  std::vector<std::uint8_t> body(len);
  if (!sock_.recv_all(body.data(), len)) return DeliveryStatus::Closed;
  wire::Reader reader(body);
  const std::uint8_t command = reader.u8();
  if (command == wire::kShutdownNotice) return DeliveryStatus::Shutdown;
  if (command != wire::kDeliver) throw std::runtime_error("unexpected push command");
  out = decode_message(reader.rest());
  return DeliveryStatus::Message;
}

void BrokerClient::close() {
  std::lock_guard<std::mutex> lock(mu_);
  sock_.close();
}

// --------------------------------------------------------------- CloudClient

CloudClient::CloudClient(const std::string& host, std::uint16_t port)
    : sock_(connect_to(host, port)) {
  sock_.set_nodelay();
}

std::optional<std::uint64_t> CloudClient::append(const std::string& topic,
                                                 const CitsMessage& msg) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_append(topic, msg));
  const std::uint8_t status = recv_u8(sock_, "append reply");
  const std::uint64_t offset = recv_u64(sock_, "append reply");
  if (status != wire::kStatusOk) return std::nullopt;
  return offset;
}

std::vector<LogRecord> CloudClient::fetch(const std::string& topic, std::uint64_t from_offset,
                                          std::uint32_t max_count) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_fetch(topic, from_offset, max_count));
  const std::uint8_t status = recv_u8(sock_, "fetch reply");
  if (status == wire::kStatusNotFound) throw NotFoundError("unknown topic: " + topic);
  if (status == wire::kStatusRange) throw RangeError("fetch offset past end");
  if (status != wire::kStatusOk) throw std::runtime_error("fetch failed");
  const std::uint32_t count = recv_u32(sock_, "fetch reply");
  std::vector<LogRecord> records;
  records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    LogRecord rec;
    rec.offset = recv_u64(sock_, "fetch record");
    const std::uint32_t len = recv_u32(sock_, "fetch record");
    std::vector<std::uint8_t> encoded(len);
    if (len > 0) recv_exact(sock_, encoded.data(), len, "fetch record");
    rec.message = decode_message(encoded);
    records.push_back(std::move(rec));
  }
  return records;
}

RegistryEntry CloudClient::resolve_producer(const std::optional<std::string>& requested_mec) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_resolve_producer(requested_mec));
  const std::uint8_t status = recv_u8(sock_, "resolve reply");
  if (status == wire::kStatusNotFound) {
    throw NotFoundError("unknown mec: " + requested_mec.value_or(""));
  }
  if (status == wire::kStatusNoMec) throw NoMecError("no mec registered");
  if (status != wire::kStatusOk) throw std::runtime_error("resolve failed");
  RegistryEntry entry;
  entry.mec_id = recv_string8(sock_, "resolve reply");
  entry.broker_address = recv_string8(sock_, "resolve reply");
  entry.cloud_topic = recv_string8(sock_, "resolve reply");
  return entry;
}

ConsumerRoute CloudClient::resolve_consumer(const std::string& mec_id,
                                            const std::string& data_type) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_resolve_consumer(mec_id, data_type));
  const std::uint8_t status = recv_u8(sock_, "resolve reply");
  if (status != wire::kStatusOk) throw std::runtime_error("resolve failed");
  ConsumerRoute route;
  route.cloud_topic = recv_string8(sock_, "resolve reply");
  route.cloud_address = recv_string8(sock_, "resolve reply");
  return route;
}

bool CloudClient::register_mec(const RegistryEntry& entry) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_register_mec(entry));
  return recv_u8(sock_, "register reply") == wire::kStatusOk;
}

void CloudClient::set_cloud_address(const std::string& address) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_set_cloud_address(address));
  if (recv_u8(sock_, "set address reply") != wire::kStatusOk) {
    throw std::runtime_error("set cloud address failed");
  }
}

CloudTopicStats CloudClient::stats(const std::string& topic) {
  std::lock_guard<std::mutex> lock(mu_);
  send_frame_or_throw(sock_, wire::build_cloud_stats(topic));
  const std::uint8_t status = recv_u8(sock_, "stats reply");
  if (status != wire::kStatusOk) throw std::runtime_error("stats failed");
  CloudTopicStats out;
  out.appended = recv_u64(sock_, "stats reply");
  out.rejected = recv_u64(sock_, "stats reply");
  out.next_offset = recv_u64(sock_, "stats reply");
  return out;
}

void CloudClient::request_shutdown() {
  std::lock_guard<std::mutex> lock(mu_);
  if (!wire::write_frame(sock_, wire::build_shutdown_server())) return;
  std::uint8_t ack = 0;
  sock_.recv_all(&ack, 1);
}

void CloudClient::close() {
  std::lock_guard<std::mutex> lock(mu_);
  sock_.close();
}

}  // namespace edgebench
