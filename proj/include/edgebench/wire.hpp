#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgebench/cloud.hpp"
#include "edgebench/message.hpp"
#include "edgebench/tcp.hpp"

namespace edgebench {

// Every request and push is one frame: u32 big-endian length, then the body
// starting with a command byte. Replies are raw fixed-shape byte strings
// (documented per command below) so a publish ack is literally one byte.
namespace wire {

inline constexpr std::uint8_t kPublish = 0x01;         // topic, message → u8 status
inline constexpr std::uint8_t kSubscribe = 0x02;       // topic → stream of pushes
inline constexpr std::uint8_t kDeliver = 0x03;         // push: message
inline constexpr std::uint8_t kStats = 0x04;           // topic → 3x u64
inline constexpr std::uint8_t kShutdownNotice = 0x05;  // push: stream ends
inline constexpr std::uint8_t kReportStats = 0x06;     // topic, 3x u64 → u8
inline constexpr std::uint8_t kShutdownServer = 0x0f;  // → u8, server stops
inline constexpr std::uint8_t kAppend = 0x10;          // topic, message → u8 + u64 offset
inline constexpr std::uint8_t kFetch = 0x11;           // topic, u64 from, u32 max → batch
inline constexpr std::uint8_t kResolveProducer = 0x12; // optional mec → u8 + 3 strings
inline constexpr std::uint8_t kResolveConsumer = 0x13; // mec, data_type → u8 + 2 strings
inline constexpr std::uint8_t kRegisterMec = 0x14;      // 3 strings → u8
inline constexpr std::uint8_t kSetCloudAddress = 0x15;  // address → u8
inline constexpr std::uint8_t kCloudStats = 0x16;       // topic → u8 + 3x u64

inline constexpr std::uint8_t kStatusOk = 0x00;
inline constexpr std::uint8_t kStatusRejected = 0x01;
inline constexpr std::uint8_t kStatusNotFound = 0x02;
inline constexpr std::uint8_t kStatusRange = 0x03;
inline constexpr std::uint8_t kStatusNoMec = 0x04;
inline constexpr std::uint8_t kStatusBadRequest = 0x05;

inline constexpr std::uint32_t kMaxFrameBytes = 64u * 1024 * 1024;

// Byte-buffer primitives shared by both ends (big-endian).
void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v);
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_string8(std::vector<std::uint8_t>& out, const std::string& s);  // u8 len + bytes

class Reader {
public:
  Reader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}
  explicit Reader(const std::vector<std::uint8_t>& buf) : Reader(buf.data(), buf.size()) {}
  // The reader only borrows the buffer; refuse temporaries outright.
  explicit Reader(std::vector<std::uint8_t>&&) = delete;

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  std::string string8();
  std::vector<std::uint8_t> bytes(std::size_t n);
  std::vector<std::uint8_t> rest();
  std::size_t remaining() const { return size_ - pos_; }
  bool done() const { return pos_ == size_; }

private:
  void need(std::size_t n) const;
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

// Frame transport. write_frame prepends the length; read_frame returns
// nullopt on clean EOF at a frame boundary and throws on anything torn.
bool write_frame(Socket& sock, const std::vector<std::uint8_t>& body);
std::optional<std::vector<std::uint8_t>> read_frame(Socket& sock);

// Request builders (frame bodies, command byte included).
std::vector<std::uint8_t> build_publish(const std::string& topic, const CitsMessage& msg);
std::vector<std::uint8_t> build_subscribe(const std::string& topic);
std::vector<std::uint8_t> build_deliver(const CitsMessage& msg);
std::vector<std::uint8_t> build_stats(const std::string& topic);
std::vector<std::uint8_t> build_shutdown_notice();
std::vector<std::uint8_t> build_report_stats(const std::string& topic, std::uint64_t accepted,
                                             std::uint64_t dropped, std::uint64_t depth);
std::vector<std::uint8_t> build_shutdown_server();
std::vector<std::uint8_t> build_append(const std::string& topic, const CitsMessage& msg);
std::vector<std::uint8_t> build_fetch(const std::string& topic, std::uint64_t from_offset,
                                      std::uint32_t max_count);
std::vector<std::uint8_t> build_resolve_producer(const std::optional<std::string>& mec);
std::vector<std::uint8_t> build_resolve_consumer(const std::string& mec,
                                                 const std::string& data_type);
std::vector<std::uint8_t> build_register_mec(const RegistryEntry& entry);
std::vector<std::uint8_t> build_set_cloud_address(const std::string& address);
std::vector<std::uint8_t> build_cloud_stats(const std::string& topic);

}  // namespace wire
}  // namespace edgebench
