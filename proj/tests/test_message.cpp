#include <string>
#include <vector>

#include "doctest.h"
#include "edgebench/message.hpp"
#include "edgebench/rng.hpp"

using namespace edgebench;

namespace {

CitsMessage random_message(SplitMix64& rng) {
  CitsMessage msg;
  msg.producer_id = static_cast<std::uint32_t>(rng.next_u64());
  msg.sequence = rng.next_u64();
  msg.origin_time_ms = static_cast<TimeMs>(rng.next_u64() >> 1);
  const auto topic_len = static_cast<std::size_t>(rng.next_u64() % 33);
  msg.topic.clear();
  for (std::size_t i = 0; i < topic_len; ++i) {
    msg.topic.push_back(static_cast<char>('a' + rng.next_u64() % 26));
  }
  msg.payload = generate_payload(rng.next_u64(), rng.next_u64() % 2048);
  return msg;
}

}  // namespace

TEST_SUITE("message") {

TEST_CASE("encode/decode round-trips bit-exact across random messages") {
  SplitMix64 rng(0x5eedu);
  for (int i = 0; i < 10000; ++i) {
    const CitsMessage msg = random_message(rng);
    const std::vector<std::uint8_t> frame = encode_message(msg);
    const CitsMessage back = decode_message(frame);
    CHECK(back == msg);
  }
}

TEST_CASE("encoding is deterministic") {
  SplitMix64 rng(7);
  const CitsMessage msg = random_message(rng);
  CHECK(encode_message(msg) == encode_message(msg));
}

TEST_CASE("encoded size is fixed overhead plus variable parts") {
  SplitMix64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const CitsMessage msg = random_message(rng);
    CHECK(encode_message(msg).size() ==
          kFrameFixedOverhead + msg.topic.size() + msg.payload.size());
    CHECK(encoded_size(msg) == kFrameFixedOverhead + msg.topic.size() + msg.payload.size());
  }

  CitsMessage msg;
  msg.topic = "cits";
  msg.payload = generate_payload(1, 1280);
  CHECK(encode_message(msg).size() == 27 + 4 + 1280);
}

TEST_CASE("every truncation of a frame fails to decode") {
  SplitMix64 rng(13);
  CitsMessage msg = random_message(rng);
  msg.topic = "vehicle/cam";
  msg.payload = generate_payload(2, 200);
  const std::vector<std::uint8_t> frame = encode_message(msg);
  for (std::size_t len = 0; len < frame.size(); ++len) {
    CHECK_THROWS_AS(decode_message(frame.data(), len), CodecError);
  }
}

TEST_CASE("decode rejects corrupted frames with the specific error") {
  CitsMessage msg;
  msg.producer_id = 9;
  msg.sequence = 4;
  msg.origin_time_ms = 1234;
  msg.topic = "t";
  msg.payload = {1, 2, 3};
  std::vector<std::uint8_t> frame = encode_message(msg);

  SUBCASE("bad magic") {
    frame[0] ^= 0xff;
    try {
      decode_message(frame);
      FAIL("expected CodecError");
    } catch (const CodecError& e) {
      CHECK(e.kind() == CodecError::Kind::BadMagic);
    }
  }
  SUBCASE("bad version") {
    frame[2] = 99;
    try {
      decode_message(frame);
      FAIL("expected CodecError");
    } catch (const CodecError& e) {
      CHECK(e.kind() == CodecError::Kind::BadVersion);
    }
  }
  SUBCASE("trailing garbage") {
    frame.push_back(0);
    try {
      decode_message(frame);
      FAIL("expected CodecError");
    } catch (const CodecError& e) {
      CHECK(e.kind() == CodecError::Kind::LengthMismatch);
    }
  }
}

TEST_CASE("encode rejects oversize fields") {
  CitsMessage msg;
  msg.topic = std::string(256, 'x');
  try {
    encode_message(msg);
    FAIL("expected CodecError");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::OversizeTopic);
  }

  msg.topic = "ok";
  msg.payload.assign((1u << 24), 0);  // one past the 24-bit length field
  try {
    encode_message(msg);
    FAIL("expected CodecError");
  } catch (const CodecError& e) {
    CHECK(e.kind() == CodecError::Kind::OversizePayload);
  }
}

TEST_CASE("payload generation is seed-deterministic") {
  CHECK(generate_payload(42, 1280) == generate_payload(42, 1280));
  CHECK(generate_payload(42, 1280) != generate_payload(43, 1280));
  for (std::size_t size : {0u, 1u, 7u, 8u, 9u, 1280u}) {
    CHECK(generate_payload(5, size).size() == size);
  }
}

TEST_CASE("control id is reserved and detected") {
  CitsMessage msg;
  msg.producer_id = kControlProducerId;
  CHECK(msg.is_control());
  msg.producer_id = 0;
  CHECK_FALSE(msg.is_control());
}

TEST_CASE("message keys hash and compare by identity fields") {
  MessageKey a{1, 1000, 5};
  MessageKey b{1, 1000, 5};
  MessageKey c{1, 1000, 6};
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(MessageKeyHash{}(a) == MessageKeyHash{}(b));
  CHECK(a < c);
}

}  // TEST_SUITE
