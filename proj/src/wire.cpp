#include "edgebench/wire.hpp"

#include <stdexcept>

namespace edgebench::wire {

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

void put_string8(std::vector<std::uint8_t>& out, const std::string& s) {
  if (s.size() > 255) {
    throw std::invalid_argument("string too long for u8 length prefix: " +
                                std::to_string(s.size()));
  }
  out.push_back(static_cast<std::uint8_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void Reader::need(std::size_t n) const {
  if (size_ - pos_ < n) {
    throw std::runtime_error("truncated wire payload");
  }
}

std::uint8_t Reader::u8() {
  need(1);
  return data_[pos_++];
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
  return v;
}

std::uint64_t Reader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
  return v;
}

std::string Reader::string8() {
  const std::uint8_t len = u8();
  need(len);
  std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
  pos_ += len;
  return s;
}

std::vector<std::uint8_t> Reader::bytes(std::size_t n) {
  need(n);
  std::vector<std::uint8_t> out(data_ + pos_, data_ + pos_ + n);
  pos_ += n;
  return out;
}

std::vector<std::uint8_t> Reader::rest() { return bytes(size_ - pos_); }

bool write_frame(Socket& sock, const std::vector<std::uint8_t>& body) {
  if (body.size() > kMaxFrameBytes) {
    throw std::invalid_argument("frame body exceeds limit");
  }
  std::vector<std::uint8_t> framed;
  framed.reserve(4 + body.size());
  put_u32(framed, static_cast<std::uint32_t>(body.size()));
  framed.insert(framed.end(), body.begin(), body.end());
  return sock.send_all(framed.data(), framed.size());
}

std::optional<std::vector<std::uint8_t>> read_frame(Socket& sock) {
  std::uint8_t len_buf[4];
  if (!sock.recv_all(len_buf, 4)) {
    return std::nullopt;  // clean EOF between frames
  }
  const std::uint32_t len = (static_cast<std::uint32_t>(len_buf[0]) << 24) |
                            (static_cast<std::uint32_t>(len_buf[1]) << 16) |
                            (static_cast<std::uint32_t>(len_buf[2]) << 8) |
                            static_cast<std::uint32_t>(len_buf[3]);
  if (len > kMaxFrameBytes) {
    throw std::runtime_error("oversized frame: " + std::to_string(len));
  }
  std::vector<std::uint8_t> body(len);
  if (len > 0 && !sock.recv_all(body.data(), len)) {
    throw std::runtime_error("connection closed mid-frame");
  }
  return body;
}

namespace {

std::vector<std::uint8_t> with_message(std::uint8_t command, const std::string& topic,
                                       const CitsMessage& msg) {
  std::vector<std::uint8_t> body;
  put_u8(body, command);
  put_string8(body, topic);
  const std::vector<std::uint8_t> encoded = encode_message(msg);
  body.insert(body.end(), encoded.begin(), encoded.end());
  return body;
}

}  // namespace

std::vector<std::uint8_t> build_publish(const std::string& topic, const CitsMessage& msg) {
  return with_message(kPublish, topic, msg);
}

std::vector<std::uint8_t> build_subscribe(const std::string& topic) {
  std::vector<std::uint8_t> body;
  put_u8(body, kSubscribe);
  put_string8(body, topic);
  return body;
}

std::vector<std::uint8_t> build_deliver(const CitsMessage& msg) {
  std::vector<std::uint8_t> body;
  put_u8(body, kDeliver);
  const std::vector<std::uint8_t> encoded = encode_message(msg);
  body.insert(body.end(), encoded.begin(), encoded.end());
  return body;
}

std::vector<std::uint8_t> build_stats(const std::string& topic) {
  std::vector<std::uint8_t> body;
  put_u8(body, kStats);
  put_string8(body, topic);
  return body;
}

std::vector<std::uint8_t> build_shutdown_notice() { return {kShutdownNotice}; }

std::vector<std::uint8_t> build_report_stats(const std::string& topic, std::uint64_t accepted,
                                             std::uint64_t dropped, std::uint64_t depth) {
  std::vector<std::uint8_t> body;
  put_u8(body, kReportStats);
  put_string8(body, topic);
  put_u64(body, accepted);
  put_u64(body, dropped);
  put_u64(body, depth);
  return body;
}

std::vector<std::uint8_t> build_shutdown_server() { return {kShutdownServer}; }

std::vector<std::uint8_t> build_append(const std::string& topic, const CitsMessage& msg) {
  return with_message(kAppend, topic, msg);
}

std::vector<std::uint8_t> build_fetch(const std::string& topic, std::uint64_t from_offset,
                                      std::uint32_t max_count) {
  std::vector<std::uint8_t> body;
  put_u8(body, kFetch);
  put_string8(body, topic);
  put_u64(body, from_offset);
  put_u32(body, max_count);
  return body;
}

std::vector<std::uint8_t> build_resolve_producer(const std::optional<std::string>& mec) {
  std::vector<std::uint8_t> body;
  put_u8(body, kResolveProducer);
  put_u8(body, mec.has_value() ? 1 : 0);
  if (mec.has_value()) put_string8(body, *mec);
  return body;
}

std::vector<std::uint8_t> build_resolve_consumer(const std::string& mec,
                                                 const std::string& data_type) {
  std::vector<std::uint8_t> body;
  put_u8(body, kResolveConsumer);
  put_string8(body, mec);
  put_string8(body, data_type);
  return body;
}

std::vector<std::uint8_t> build_register_mec(const RegistryEntry& entry) {
  std::vector<std::uint8_t> body;
  put_u8(body, kRegisterMec);
  put_string8(body, entry.mec_id);
  put_string8(body, entry.broker_address);
  put_string8(body, entry.cloud_topic);
  return body;
}

std::vector<std::uint8_t> build_set_cloud_address(const std::string& address) {
  std::vector<std::uint8_t> body;
  put_u8(body, kSetCloudAddress);
  put_string8(body, address);
  return body;
}

std::vector<std::uint8_t> build_cloud_stats(const std::string& topic) {
  std::vector<std::uint8_t> body;
  put_u8(body, kCloudStats);
  put_string8(body, topic);
  return body;
}

}  // namespace edgebench::wire
