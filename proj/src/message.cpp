#include "edgebench/message.hpp"

#include "edgebench/rng.hpp"

namespace edgebench {

namespace {

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

std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_message(const CitsMessage& msg) {
  if (msg.topic.size() > kMaxTopicLen) {
    throw CodecError(CodecError::Kind::OversizeTopic,
                     "topic exceeds 255 bytes (" + std::to_string(msg.topic.size()) + ")");
  }
  if (msg.payload.size() > kMaxPayloadLen) {
    throw CodecError(CodecError::Kind::OversizePayload,
                     "payload exceeds 2^24-1 bytes (" + std::to_string(msg.payload.size()) + ")");
  }

  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(msg));
  out.push_back(kFrameMagic0);
  out.push_back(kFrameMagic1);
  out.push_back(kFrameVersion);
  put_u32(out, msg.producer_id);
  put_u64(out, msg.sequence);
  put_u64(out, static_cast<std::uint64_t>(msg.origin_time_ms));
  out.push_back(static_cast<std::uint8_t>(msg.topic.size()));
  out.insert(out.end(), msg.topic.begin(), msg.topic.end());
  const std::uint32_t plen = static_cast<std::uint32_t>(msg.payload.size());
  out.push_back(static_cast<std::uint8_t>(plen >> 16));
  out.push_back(static_cast<std::uint8_t>(plen >> 8));
  out.push_back(static_cast<std::uint8_t>(plen));
  out.insert(out.end(), msg.payload.begin(), msg.payload.end());
  return out;
}

CitsMessage decode_message(const std::uint8_t* data, std::size_t size) {
  if (size < 2) throw CodecError(CodecError::Kind::Truncated, "frame shorter than magic");
  if (data[0] != kFrameMagic0 || data[1] != kFrameMagic1) {
    throw CodecError(CodecError::Kind::BadMagic, "bad frame magic");
  }
  if (size < 3) throw CodecError(CodecError::Kind::Truncated, "frame truncated before version");
  if (data[2] != kFrameVersion) {
    throw CodecError(CodecError::Kind::BadVersion,
                     "unsupported frame version " + std::to_string(data[2]));
  }
  if (size < 24) throw CodecError(CodecError::Kind::Truncated, "frame truncated in fixed header");

  CitsMessage msg;
  msg.producer_id = get_u32(data + 3);
  msg.sequence = get_u64(data + 7);
  msg.origin_time_ms = static_cast<TimeMs>(get_u64(data + 15));
  const std::size_t topic_len = data[23];
  std::size_t pos = 24;
  if (size < pos + topic_len + 3) {
    throw CodecError(CodecError::Kind::Truncated, "frame truncated in topic");
  }
  msg.topic.assign(reinterpret_cast<const char*>(data + pos), topic_len);
  pos += topic_len;
  const std::size_t payload_len = (std::size_t{data[pos]} << 16) |
                                  (std::size_t{data[pos + 1]} << 8) | std::size_t{data[pos + 2]};
  pos += 3;
  if (size < pos + payload_len) {
    throw CodecError(CodecError::Kind::Truncated, "frame truncated mid-payload");
  }
  if (size != pos + payload_len) {
    throw CodecError(CodecError::Kind::LengthMismatch,
                     "declared payload length does not match frame size");
  }
  msg.payload.assign(data + pos, data + pos + payload_len);
  return msg;
}

CitsMessage decode_message(const std::vector<std::uint8_t>& frame) {
  return decode_message(frame.data(), frame.size());
}

std::vector<std::uint8_t> generate_payload(std::uint64_t seed, std::size_t size) {
  std::vector<std::uint8_t> out(size);
  SplitMix64 rng(seed);
  std::size_t i = 0;
  while (i + 8 <= size) {
    std::uint64_t word = rng.next_u64();
    for (int b = 0; b < 8; ++b) out[i++] = static_cast<std::uint8_t>(word >> (8 * b));
  }
  if (i < size) {
    std::uint64_t word = rng.next_u64();
    while (i < size) {
      out[i++] = static_cast<std::uint8_t>(word);
      word >>= 8;
    }
  }
  return out;
}

}  // namespace edgebench
