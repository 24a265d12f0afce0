#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgebench/message.hpp"

namespace edgebench {

struct NotFoundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoMecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LogRecord {
  std::uint64_t offset = 0;
  CitsMessage message;
};

struct CloudTopicStats {
  std::uint64_t appended = 0;
  std::uint64_t rejected = 0;  // storage bound hit
  std::uint64_t next_offset = 0;
};

// Append-only, single-partition topic logs. Records are immutable once
// appended; fetches are non-blocking reads of the committed prefix and
// clients poll for new data.
class CloudLogCore {
public:
  // max_records_per_topic = 0 means unbounded.
  explicit CloudLogCore(std::uint64_t max_records_per_topic = 0);

  // Returns the record's offset, or nullopt when the storage bound rejected
  // the append (counted per topic).
  std::optional<std::uint64_t> append(const std::string& topic, CitsMessage msg);

  // Up to max_count records starting at from_offset, in offset order.
  // Throws NotFoundError for an unknown topic, RangeError when from_offset
  // points past the end of the log (== end is the empty-poll boundary).
  std::vector<LogRecord> fetch(const std::string& topic, std::uint64_t from_offset,
                               std::uint32_t max_count) const;

  std::uint64_t end_offset(const std::string& topic) const;  // 0 for unknown topic
  CloudTopicStats stats(const std::string& topic) const;
  std::vector<std::string> topic_names() const;

  // Binary append journal for post-run analysis; one length-prefixed record
  // (topic + encoded frame) per appended message.
  void open_journal(const std::string& path);
  void close_journal();

private:
  struct TopicLog {
    std::vector<CitsMessage> records;  // index == offset
    std::uint64_t rejected = 0;
  };

  mutable std::mutex mu_;
  std::map<std::string, TopicLog> topics_;
  std::uint64_t max_records_;
  std::ofstream journal_;
};

std::vector<std::pair<std::string, CitsMessage>> read_journal(const std::string& path);

struct RegistryEntry {
  std::string mec_id;
  std::string broker_address;  // host:port of that MEC's edge broker
  std::string cloud_topic;     // where the MEC's stream lands on the cloud
};

struct ConsumerRoute {
  std::string cloud_topic;
  std::string cloud_address;
};

// The cloud data service's directory: which MEC a producer should publish to
// and which cloud topic a consumer should read for a given MEC and data type.
class Registry {
public:
  void set_cloud_address(const std::string& address);

  // Throws std::invalid_argument when mec_id is already registered.
  void register_mec(const RegistryEntry& entry);

  // Entry for requested_mec if given; the single registered MEC otherwise;
  // round-robin across MECs when several are registered and no preference is
  // expressed. Throws NoMecError on an empty registry, NotFoundError for an
  // unknown mec_id.
  RegistryEntry resolve_producer(const std::optional<std::string>& requested_mec);

  // Topic naming rule: cloud/<mec_id>/<data_type>.
  ConsumerRoute resolve_consumer(const std::string& mec_id, const std::string& data_type) const;

  std::vector<RegistryEntry> entries() const;

private:
  mutable std::mutex mu_;
  std::vector<RegistryEntry> entries_;
  std::size_t round_robin_ = 0;
  std::string cloud_address_;
};

}  // namespace edgebench
