#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgebench/message.hpp"

namespace edgebench {

struct ProducerConfig {
  std::uint32_t producer_id = 1;
  double rate_hz = 2.0;
  std::uint32_t payload_bytes = 1280;
  double duration_s = 60.0;
  std::uint64_t seed = 0;
  double clock_skew_ms = 0;  // injected offset added to origin stamps
  std::string topic = "cits";

  void validate() const;  // throws std::invalid_argument
};

// Fixed-interval open-loop schedule: send k fires at start + k/rate, so the
// count never drifts with per-send latency.
std::size_t planned_send_count(const ProducerConfig& cfg);
double send_offset_ms(const ProducerConfig& cfg, std::size_t k);

// The message for send k, origin-stamped by the caller's clock (already
// including clock_skew_ms). Payload bytes derive from (seed, producer, k).
CitsMessage make_message(const ProducerConfig& cfg, std::size_t k, TimeMs origin_time_ms);

struct SentLog {
  std::vector<MessageKey> entries;
};

struct ReceivedRecord {
  MessageKey key;
  TimeMs receive_time_ms = 0;
};

struct ReceivedLog {
  std::vector<ReceivedRecord> entries;
  bool timed_out = false;   // consumer stopped on idle timeout, not end marker
  bool late_start = false;  // consumer attached after production began
};

// CSV persistence. Sent: producer_id,sequence,origin_time_ms. Received adds
// receive_time_ms. Flags persist as "# flag: <name>" comment lines above the
// header.
void write_sent_csv(const std::string& path, const SentLog& log);
SentLog load_sent_csv(const std::string& path);
void write_received_csv(const std::string& path, const ReceivedLog& log);
ReceivedLog load_received_csv(const std::string& path);

SentLog merge_sent(const std::vector<SentLog>& logs);
ReceivedLog merge_received(const std::vector<ReceivedLog>& logs);

}  // namespace edgebench
