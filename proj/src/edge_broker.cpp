#include "edgebench/edge_broker.hpp"

#include <cassert>

namespace edgebench {

EdgeBrokerCore::EdgeBrokerCore(std::size_t default_capacity)
    : default_capacity_(default_capacity) {}

EdgeBrokerCore::Topic& EdgeBrokerCore::topic_locked(const std::string& name) {
  auto it = topics_.find(name);
  if (it == topics_.end()) {
    Topic t;
    t.capacity = default_capacity_;
    it = topics_.emplace(name, std::move(t)).first;
  }
  return it->second;
}

void EdgeBrokerCore::retire_locked(Topic& t) {
  if (t.cursors.empty()) return;  // retention: no subscriber, queue holds
  std::uint64_t min_cursor = UINT64_MAX;
  for (const auto& [id, cur] : t.cursors) min_cursor = std::min(min_cursor, cur);
  while (t.retired < min_cursor) {
    assert(!t.queue.empty());
    t.queue.pop_front();
    ++t.retired;
  }
}

PublishResult EdgeBrokerCore::publish(const std::string& topic, CitsMessage msg) {
  std::unique_lock lock(mu_);
  Topic& t = topic_locked(topic);
  const std::uint64_t depth = t.accepted - t.retired;
  assert(depth <= t.capacity);
  if (depth >= t.capacity) {
    ++t.rejected;
    return PublishResult::Rejected;
  }
  t.queue.push_back(std::move(msg));
  ++t.accepted;
  lock.unlock();
  cv_.notify_all();
  return PublishResult::Accepted;
}

EdgeBrokerCore::SubscriberId EdgeBrokerCore::subscribe(const std::string& topic) {
  std::lock_guard lock(mu_);
  Topic& t = topic_locked(topic);
  const SubscriberId id = next_subscriber_++;
  t.cursors[id] = t.retired;  // start at the oldest retained message
  return id;
}

void EdgeBrokerCore::unsubscribe(const std::string& topic, SubscriberId id) {
  std::lock_guard lock(mu_);
  auto it = topics_.find(topic);
  if (it == topics_.end()) return;
  it->second.cursors.erase(id);
  retire_locked(it->second);
}

std::optional<CitsMessage> EdgeBrokerCore::try_next(const std::string& topic, SubscriberId id) {
  std::lock_guard lock(mu_);
  auto it = topics_.find(topic);
  if (it == topics_.end()) return std::nullopt;
  Topic& t = it->second;
  auto cur = t.cursors.find(id);
  if (cur == t.cursors.end() || cur->second >= t.accepted) return std::nullopt;
  CitsMessage msg = t.queue[cur->second - t.retired];
  ++cur->second;
  retire_locked(t);
  return msg;
}

EdgeBrokerCore::WaitStatus EdgeBrokerCore::next(const std::string& topic, SubscriberId id,
                                                CitsMessage& out,
                                                std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto it = topics_.find(topic);
    if (it != topics_.end()) {
      Topic& t = it->second;
      auto cur = t.cursors.find(id);
      if (cur != t.cursors.end() && cur->second < t.accepted) {
        out = t.queue[cur->second - t.retired];
        ++cur->second;
        retire_locked(t);
        return WaitStatus::Message;
      }
    }
    if (shutdown_) return WaitStatus::Shutdown;
    if (cv_.wait_until(lock, deadline) == std::cv_status::timeout) {
      return WaitStatus::Timeout;
    }
  }
}

TopicStats EdgeBrokerCore::stats(const std::string& topic) const {
  std::lock_guard lock(mu_);
  auto it = topics_.find(topic);
  if (it == topics_.end()) return TopicStats{};
  const Topic& t = it->second;
  if (t.external_only) return t.external;
  TopicStats s;
  s.accepted = t.accepted;
  s.rejected = t.rejected;
  s.published = t.accepted + t.rejected;
  s.delivered = t.retired;
  s.depth = t.accepted - t.retired;
  return s;
}

std::uint64_t EdgeBrokerCore::delivered_to(const std::string& topic, SubscriberId id) const {
  std::lock_guard lock(mu_);
  auto it = topics_.find(topic);
  if (it == topics_.end()) return 0;
  auto cur = it->second.cursors.find(id);
  return cur == it->second.cursors.end() ? 0 : cur->second;
}

void EdgeBrokerCore::set_capacity(const std::string& topic, std::size_t capacity) {
  std::lock_guard lock(mu_);
  topic_locked(topic).capacity = capacity;
}

void EdgeBrokerCore::report_external_stats(const std::string& topic, std::uint64_t accepted,
                                           std::uint64_t dropped, std::uint64_t depth) {
  std::lock_guard lock(mu_);
  Topic& t = topic_locked(topic);
  t.external_only = true;
  t.external.accepted = accepted;
  t.external.rejected = dropped;
  t.external.published = accepted + dropped;
  t.external.delivered = accepted - std::min<std::uint64_t>(accepted, depth);
  t.external.depth = depth;
}

void EdgeBrokerCore::shutdown() {
  {
    std::lock_guard lock(mu_);
    shutdown_ = true;
  }
  cv_.notify_all();
}

bool EdgeBrokerCore::is_shutdown() const {
  std::lock_guard lock(mu_);
  return shutdown_;
}

std::vector<std::string> EdgeBrokerCore::topic_names() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> names;
  names.reserve(topics_.size());
  for (const auto& [name, t] : topics_) names.push_back(name);
  return names;
}

}  // namespace edgebench
