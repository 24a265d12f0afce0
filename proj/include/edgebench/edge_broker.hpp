#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "edgebench/message.hpp"

namespace edgebench {

enum class PublishResult { Accepted, Rejected };

struct TopicStats {
  std::uint64_t published = 0;  // accepted + rejected attempts
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t delivered = 0;  // retired: consumed by every subscriber
  std::uint64_t depth = 0;      // currently retained
};

// Bounded-queue pub/sub broker playing the MEC role. One shared FIFO per
// topic; each subscriber owns a cursor; a message retires once every
// subscriber has passed it. Overflow policy is reject-newest, so loss is
// attributable at the producer side.
class EdgeBrokerCore {
public:
  static constexpr std::size_t kDefaultCapacity = 1000;

  explicit EdgeBrokerCore(std::size_t default_capacity = kDefaultCapacity);

  using SubscriberId = std::uint64_t;

  PublishResult publish(const std::string& topic, CitsMessage msg);

  SubscriberId subscribe(const std::string& topic);
  void unsubscribe(const std::string& topic, SubscriberId id);

  // Non-blocking: next unconsumed message for this subscriber, if any.
  std::optional<CitsMessage> try_next(const std::string& topic, SubscriberId id);

  enum class WaitStatus { Message, Timeout, Shutdown };
  WaitStatus next(const std::string& topic, SubscriberId id, CitsMessage& out,
                  std::chrono::milliseconds timeout);

  TopicStats stats(const std::string& topic) const;  // zeroed for unknown topics
  std::uint64_t delivered_to(const std::string& topic, SubscriberId id) const;

  void set_capacity(const std::string& topic, std::size_t capacity);

  // Counters pushed by an external component (the ".stage" convention):
  // surfaced through stats() under the given pseudo-topic name.
  void report_external_stats(const std::string& topic, std::uint64_t accepted,
                             std::uint64_t dropped, std::uint64_t depth);

  void shutdown();
  bool is_shutdown() const;

  std::vector<std::string> topic_names() const;

private:
  struct Topic {
    std::deque<CitsMessage> queue;  // entries [retired, accepted)
    std::size_t capacity = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;
    std::uint64_t retired = 0;
    std::map<SubscriberId, std::uint64_t> cursors;  // absolute indices
    bool external_only = false;
    TopicStats external;
  };

  Topic& topic_locked(const std::string& name);
  void retire_locked(Topic& t);

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::string, Topic> topics_;
  std::size_t default_capacity_;
  SubscriberId next_subscriber_ = 1;
  bool shutdown_ = false;
};

}  // namespace edgebench
