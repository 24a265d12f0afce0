#include "edgebench/workload.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edgebench/rng.hpp"

namespace edgebench {

void ProducerConfig::validate() const {
  if (rate_hz <= 0) {
    throw std::invalid_argument("producer rate must be positive");
  }
  if (duration_s <= 0) {
    throw std::invalid_argument("producer duration must be positive");
  }
  if (topic.empty() || topic.size() > kMaxTopicLen) {
    throw std::invalid_argument("producer topic must be 1..255 bytes");
  }
  if (producer_id == kControlProducerId) {
    throw std::invalid_argument("producer id collides with the control id");
  }
}

std::size_t planned_send_count(const ProducerConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.rate_hz * cfg.duration_s));
}

double send_offset_ms(const ProducerConfig& cfg, std::size_t k) {
  return static_cast<double>(k) * 1000.0 / cfg.rate_hz;
}

CitsMessage make_message(const ProducerConfig& cfg, std::size_t k, TimeMs origin_time_ms) {
  CitsMessage msg;
  msg.producer_id = cfg.producer_id;
  msg.sequence = k;
  msg.origin_time_ms = origin_time_ms;
  msg.topic = cfg.topic;
  msg.payload = generate_payload(mix_seed(mix_seed(cfg.seed, cfg.producer_id), k),
                                 cfg.payload_bytes);
  return msg;
}

namespace {

void write_flags(std::ofstream& out, const ReceivedLog& log) {
  if (log.timed_out) {
    out << "# flag: timeout\n";
  }
  if (log.late_start) {
    out << "# flag: late-start\n";
  }
}

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open csv file: " + path);
  }
  return in;
}

// Splits a csv line; throws if the field count is wrong.
std::vector<std::string> split_fields(const std::string& line, std::size_t expected,
                                      const std::string& path, std::size_t line_no) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    fields.push_back(field);
  }
  if (fields.size() != expected) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(expected) + " fields, got " +
                             std::to_string(fields.size()));
  }
  return fields;
}

}  // namespace

void write_sent_csv(const std::string& path, const SentLog& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write csv file: " + path);
  }
  out << "producer_id,sequence,origin_time_ms\n";
  for (const MessageKey& key : log.entries) {
    out << key.producer_id << ',' << key.sequence << ',' << key.origin_time_ms << '\n';
  }
}

SentLog load_sent_csv(const std::string& path) {
  std::ifstream in = open_for_read(path);
  SentLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("producer_id", 0) == 0) {
      continue;
    }
    const auto fields = split_fields(line, 3, path, line_no);
    MessageKey key;
    key.producer_id = static_cast<std::uint32_t>(std::stoul(fields[0]));
    key.sequence = std::stoull(fields[1]);
    key.origin_time_ms = std::stoll(fields[2]);
    log.entries.push_back(key);
  }
  return log;
}

void write_received_csv(const std::string& path, const ReceivedLog& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write csv file: " + path);
  }
  write_flags(out, log);
  out << "producer_id,sequence,origin_time_ms,receive_time_ms\n";
  for (const ReceivedRecord& rec : log.entries) {
    out << rec.key.producer_id << ',' << rec.key.sequence << ',' << rec.key.origin_time_ms
        << ',' << rec.receive_time_ms << '\n';
  }
}

ReceivedLog load_received_csv(const std::string& path) {
  std::ifstream in = open_for_read(path);
  ReceivedLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line == "# flag: timeout") {
      log.timed_out = true;
      continue;
    }
    if (line == "# flag: late-start") {
      log.late_start = true;
      continue;
    }
    if (line.empty() || line[0] == '#' || line.rfind("producer_id", 0) == 0) {
      continue;
    }
    const auto fields = split_fields(line, 4, path, line_no);
    ReceivedRecord rec;
    rec.key.producer_id = static_cast<std::uint32_t>(std::stoul(fields[0]));
    rec.key.sequence = std::stoull(fields[1]);
    rec.key.origin_time_ms = std::stoll(fields[2]);
    rec.receive_time_ms = std::stoll(fields[3]);
    log.entries.push_back(rec);
  }
  return log;
}

SentLog merge_sent(const std::vector<SentLog>& logs) {
  SentLog merged;
  for (const SentLog& log : logs) {
    merged.entries.insert(merged.entries.end(), log.entries.begin(), log.entries.end());
  }
  return merged;
}

ReceivedLog merge_received(const std::vector<ReceivedLog>& logs) {
  ReceivedLog merged;
  for (const ReceivedLog& log : logs) {
    merged.entries.insert(merged.entries.end(), log.entries.begin(), log.entries.end());
    merged.timed_out = merged.timed_out || log.timed_out;
    merged.late_start = merged.late_start || log.late_start;
  }
  return merged;
}

}  // namespace edgebench
