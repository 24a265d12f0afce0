#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgebench/clock.hpp"

namespace edgebench {

// Producer id reserved for harness control messages (end-of-run sentinel).
inline constexpr std::uint32_t kControlProducerId = 0xffffffffu;

// One timestamped, producer-identified envelope. This is the unit that flows
// producer -> edge broker -> anonymizer -> cloud log -> consumer.
struct CitsMessage {
  std::uint32_t producer_id = 0;
  std::uint64_t sequence = 0;          // per-producer monotonic counter
  TimeMs origin_time_ms = 0;           // sender wall clock at publish
  std::string topic;                   // routing label, "mec1/cits"
  std::vector<std::uint8_t> payload;

  bool is_control() const { return producer_id == kControlProducerId; }
  bool operator==(const CitsMessage&) const = default;
};

// Identity projection used by the loss join: origin time and producer id,
// with the sequence carried too so same-millisecond sends from one producer
// stay distinct at rates above the nominal 2 Hz.
struct MessageKey {
  std::uint32_t producer_id = 0;
  TimeMs origin_time_ms = 0;
  std::uint64_t sequence = 0;

  bool operator==(const MessageKey&) const = default;
  auto operator<=>(const MessageKey&) const = default;
};

struct MessageKeyHash {
  std::size_t operator()(const MessageKey& k) const noexcept {
    std::uint64_t h = k.producer_id;
    h = h * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(k.origin_time_ms);
    h = h * 0x9e3779b97f4a7c15ULL + k.sequence;
    return static_cast<std::size_t>(h ^ (h >> 32));
  }
};

inline MessageKey message_key(const CitsMessage& m) {
  return MessageKey{m.producer_id, m.origin_time_ms, m.sequence};
}

// Frame layout, big-endian:
//   magic 0xC1 0x75 | version 0x01 | producer_id u32 | sequence u64 |
//   origin_time_ms i64 | topic_len u8 | topic | payload_len u24 | payload
inline constexpr std::uint8_t kFrameMagic0 = 0xc1;
inline constexpr std::uint8_t kFrameMagic1 = 0x75;
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameFixedOverhead = 2 + 1 + 4 + 8 + 8 + 1 + 3;  // 27
inline constexpr std::size_t kMaxTopicLen = 255;
inline constexpr std::size_t kMaxPayloadLen = (1u << 24) - 1;

inline std::size_t encoded_size(const CitsMessage& m) {
  return kFrameFixedOverhead + m.topic.size() + m.payload.size();
}

class CodecError : public std::runtime_error {
public:
  enum class Kind {
    OversizeTopic,
    OversizePayload,
    Truncated,
    BadMagic,
    BadVersion,
    LengthMismatch,
  };

  CodecError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

std::vector<std::uint8_t> encode_message(const CitsMessage& msg);
CitsMessage decode_message(const std::uint8_t* data, std::size_t size);
CitsMessage decode_message(const std::vector<std::uint8_t>& frame);

// Deterministic pseudorandom payload; same (seed, size) gives the same bytes.
std::vector<std::uint8_t> generate_payload(std::uint64_t seed, std::size_t size);

}  // namespace edgebench
