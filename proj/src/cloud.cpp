#include "edgebench/cloud.hpp"

#include <algorithm>

namespace edgebench {

namespace {

void put_u32(std::ofstream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
               static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

}  // namespace

CloudLogCore::CloudLogCore(std::uint64_t max_records_per_topic)
    : max_records_(max_records_per_topic) {}

std::optional<std::uint64_t> CloudLogCore::append(const std::string& topic, CitsMessage msg) {
  std::lock_guard<std::mutex> lock(mu_);
  TopicLog& log = topics_[topic];
  if (max_records_ != 0 && log.records.size() >= max_records_) {
    ++log.rejected;
    return std::nullopt;
  }
  if (journal_.is_open()) {
    const std::vector<std::uint8_t> frame = encode_message(msg);
    put_u32(journal_, static_cast<std::uint32_t>(1 + topic.size() + frame.size()));
    const char topic_len = static_cast<char>(topic.size());
    journal_.write(&topic_len, 1);
    journal_.write(topic.data(), static_cast<std::streamsize>(topic.size()));
    journal_.write(reinterpret_cast<const char*>(frame.data()),
                   static_cast<std::streamsize>(frame.size()));
    journal_.put('\n');
  }
  log.records.push_back(std::move(msg));
  return log.records.size() - 1;
}

std::vector<LogRecord> CloudLogCore::fetch(const std::string& topic, std::uint64_t from_offset,
                                           std::uint32_t max_count) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = topics_.find(topic);
  if (it == topics_.end()) {
    throw NotFoundError("unknown topic: " + topic);
  }
  const TopicLog& log = it->second;
  if (from_offset > log.records.size()) {
    throw RangeError("fetch offset " + std::to_string(from_offset) + " beyond log end " +
                     std::to_string(log.records.size()));
  }
  std::vector<LogRecord> out;
  const std::uint64_t end =
      std::min<std::uint64_t>(log.records.size(), from_offset + max_count);
  out.reserve(end - from_offset);
  for (std::uint64_t off = from_offset; off < end; ++off) {
    out.push_back({off, log.records[off]});
  }
  return out;
}

std::uint64_t CloudLogCore::end_offset(const std::string& topic) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = topics_.find(topic);
  return it == topics_.end() ? 0 : it->second.records.size();
}

CloudTopicStats CloudLogCore::stats(const std::string& topic) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = topics_.find(topic);
  if (it == topics_.end()) {
    return {};
  }
  return {it->second.records.size(), it->second.rejected, it->second.records.size()};
}

std::vector<std::string> CloudLogCore::topic_names() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::string> names;
  names.reserve(topics_.size());
  for (const auto& [name, log] : topics_) {
    names.push_back(name);
  }
  return names;
}

void CloudLogCore::open_journal(const std::string& path) {
  std::lock_guard<std::mutex> lock(mu_);
  journal_.open(path, std::ios::binary | std::ios::trunc);
  if (!journal_) {
    throw std::runtime_error("cannot open journal file: " + path);
  }
}

void CloudLogCore::close_journal() {
  std::lock_guard<std::mutex> lock(mu_);
  if (journal_.is_open()) {
    journal_.close();
  }
}

std::vector<std::pair<std::string, CitsMessage>> read_journal(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open journal file: " + path);
  }
  std::vector<std::pair<std::string, CitsMessage>> out;
  char len_buf[4];
  while (in.read(len_buf, 4)) {
    const std::uint32_t len = (static_cast<std::uint32_t>(static_cast<unsigned char>(len_buf[0])) << 24) |
                              (static_cast<std::uint32_t>(static_cast<unsigned char>(len_buf[1])) << 16) |
                              (static_cast<std::uint32_t>(static_cast<unsigned char>(len_buf[2])) << 8) |
                              static_cast<std::uint32_t>(static_cast<unsigned char>(len_buf[3]));
    std::vector<char> record(len);
    if (!in.read(record.data(), len)) {
      throw std::runtime_error("truncated journal record");
    }
    in.get();  // record separator
    if (len < 1) {
      throw std::runtime_error("empty journal record");
    }
    const auto topic_len = static_cast<std::size_t>(static_cast<unsigned char>(record[0]));
    if (1 + topic_len > len) {
      throw std::runtime_error("journal topic overruns record");
    }
    std::string topic(record.data() + 1, topic_len);
    CitsMessage msg = decode_message(
        reinterpret_cast<const std::uint8_t*>(record.data()) + 1 + topic_len,
        len - 1 - topic_len);
    out.emplace_back(std::move(topic), std::move(msg));
  }
  return out;
}

void Registry::set_cloud_address(const std::string& address) {
  std::lock_guard<std::mutex> lock(mu_);
  cloud_address_ = address;
}

void Registry::register_mec(const RegistryEntry& entry) {
  std::lock_guard<std::mutex> lock(mu_);
  for (const RegistryEntry& e : entries_) {
    if (e.mec_id == entry.mec_id) {
      throw std::invalid_argument("mec already registered: " + entry.mec_id);
    }
  }
  entries_.push_back(entry);
}

RegistryEntry Registry::resolve_producer(const std::optional<std::string>& requested_mec) {
  std::lock_guard<std::mutex> lock(mu_);
  if (entries_.empty()) {
    throw NoMecError("no MEC registered");
  }
  if (requested_mec.has_value()) {
    for (const RegistryEntry& e : entries_) {
      if (e.mec_id == *requested_mec) {
        return e;
      }
    }
    throw NotFoundError("unknown mec: " + *requested_mec);
  }
  if (entries_.size() == 1) {
    return entries_.front();
  }
  const RegistryEntry& e = entries_[round_robin_ % entries_.size()];
  ++round_robin_;
  return e;
}

ConsumerRoute Registry::resolve_consumer(const std::string& mec_id,
                                         const std::string& data_type) const {
  std::lock_guard<std::mutex> lock(mu_);
  const bool known = std::any_of(entries_.begin(), entries_.end(),
                                 [&](const RegistryEntry& e) { return e.mec_id == mec_id; });
  if (!known) {
    throw NotFoundError("unknown mec: " + mec_id);
  }
  return {"cloud/" + mec_id + "/" + data_type, cloud_address_};
}

std::vector<RegistryEntry> Registry::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

}  // namespace edgebench
