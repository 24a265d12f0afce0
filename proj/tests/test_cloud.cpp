#include <cstdio>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "edgebench/cloud.hpp"
#include "edgebench/rng.hpp"

using namespace edgebench;

namespace {

CitsMessage msg_for(std::uint32_t producer, std::uint64_t seq) {
  CitsMessage m;
  m.producer_id = producer;
  m.sequence = seq;
  m.origin_time_ms = 5000 + static_cast<TimeMs>(seq);
  m.topic = "cloud/mec-1/cits";
  m.payload = generate_payload(seq, 64);
  return m;
}

}  // namespace

TEST_SUITE("cloud") {

TEST_CASE("appends to a fresh topic yield contiguous offsets") {
  CloudLogCore log;
  CHECK(log.append("t", msg_for(1, 0)) == 0);
  CHECK(log.append("t", msg_for(1, 1)) == 1);
  CHECK(log.append("t", msg_for(1, 2)) == 2);
  CHECK(log.end_offset("t") == 3);
}

TEST_CASE("append then fetch returns the same message bit-exact") {
  CloudLogCore log;
  const CitsMessage original = msg_for(9, 77);
  log.append("t", original);
  const auto records = log.fetch("t", 0, 10);
  REQUIRE(records.size() == 1);
  CHECK(records[0].offset == 0);
  CHECK(records[0].message == original);
  CHECK(encode_message(records[0].message) == encode_message(original));
}

TEST_CASE("fetch boundaries") {
  CloudLogCore log;
  for (std::uint64_t i = 0; i < 3; ++i) {
    log.append("t", msg_for(1, i));
  }
  CHECK(log.fetch("t", 0, 10).size() == 3);
  CHECK(log.fetch("t", 3, 10).empty());  // polling at the end is fine
  CHECK(log.fetch("t", 1, 1).size() == 1);
  CHECK(log.fetch("t", 1, 1)[0].offset == 1);
  CHECK_THROWS_AS(log.fetch("t", 4, 10), RangeError);
  CHECK_THROWS_AS(log.fetch("missing", 0, 10), NotFoundError);
}

TEST_CASE("fetched records never change across fetches") {
  CloudLogCore log;
  for (std::uint64_t i = 0; i < 5; ++i) {
    log.append("t", msg_for(2, i));
  }
  const auto first = log.fetch("t", 0, 5);
  for (std::uint64_t i = 5; i < 10; ++i) {
    log.append("t", msg_for(2, i));
  }
  const auto second = log.fetch("t", 0, 5);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].offset == second[i].offset);
    CHECK(first[i].message == second[i].message);
  }
}

TEST_CASE("concurrent appends stay distinct and contiguous") {
  CloudLogCore log;
  const int per_thread = 500;
  auto writer = [&](std::uint32_t producer) {
    for (int i = 0; i < per_thread; ++i) {
      CHECK(log.append("t", msg_for(producer, static_cast<std::uint64_t>(i))).has_value());
    }
  };
  std::thread a(writer, 1), b(writer, 2);
  a.join();
  b.join();
  const auto records = log.fetch("t", 0, 2 * per_thread);
  REQUIRE(records.size() == 2 * per_thread);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].offset == i);  // contiguous, no duplicates
  }
  // Per producer, append order was preserved.
  std::uint64_t next1 = 0, next2 = 0;
  for (const auto& rec : records) {
    if (rec.message.producer_id == 1) {
      CHECK(rec.message.sequence == next1++);
    } else {
      CHECK(rec.message.sequence == next2++);
    }
  }
}

TEST_CASE("interleaved append/fetch reads the exact log prefix") {
  CloudLogCore log;
  SplitMix64 rng(31337);
  std::vector<CitsMessage> appended;
  std::vector<CitsMessage> consumed;
  std::uint64_t read_offset = 0;
  for (int step = 0; step < 2000; ++step) {
    if (rng.next_u64() % 2 == 0) {
      CitsMessage m = msg_for(1, static_cast<std::uint64_t>(appended.size()));
      log.append("t", m);
      appended.push_back(std::move(m));
    } else if (!appended.empty()) {
      const auto batch = log.fetch("t", read_offset, 1 + rng.next_u64() % 5);
      for (const auto& rec : batch) {
        CHECK(rec.offset == read_offset++);
        consumed.push_back(rec.message);
      }
    }
  }
  // Drain the tail, then compare byte-for-byte with what was appended.
  for (const auto& rec : log.fetch("t", read_offset, 1u << 20)) {
    consumed.push_back(rec.message);
  }
  REQUIRE(consumed.size() == appended.size());
  for (std::size_t i = 0; i < consumed.size(); ++i) {
    CHECK(consumed[i] == appended[i]);
  }
}

TEST_CASE("storage bound rejects and counts the overflow") {
  CloudLogCore log(3);
  CHECK(log.append("t", msg_for(1, 0)).has_value());
  CHECK(log.append("t", msg_for(1, 1)).has_value());
  CHECK(log.append("t", msg_for(1, 2)).has_value());
  CHECK_FALSE(log.append("t", msg_for(1, 3)).has_value());
  CHECK_FALSE(log.append("t", msg_for(1, 4)).has_value());
  const auto st = log.stats("t");
  CHECK(st.appended == 3);
  CHECK(st.rejected == 2);
  CHECK(st.next_offset == 3);
}

TEST_CASE("journal round-trips the append stream") {
  const std::string path = "journal_test.bin";
  {
    CloudLogCore log;
    log.open_journal(path);
    log.append("alpha", msg_for(1, 0));
    log.append("beta", msg_for(2, 1));
    log.append("alpha", msg_for(1, 2));
    log.close_journal();
  }
  const auto entries = read_journal(path);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0].first == "alpha");
  CHECK(entries[0].second == msg_for(1, 0));
  CHECK(entries[1].first == "beta");
  CHECK(entries[1].second == msg_for(2, 1));
  CHECK(entries[2].first == "alpha");
  CHECK(entries[2].second == msg_for(1, 2));
  std::remove(path.c_str());
}

TEST_CASE("registry resolves producers per the preference rules") {
  Registry reg;
  CHECK_THROWS_AS(reg.resolve_producer(std::nullopt), NoMecError);

  reg.register_mec({"mec-1", "127.0.0.1:5680", "cloud/mec-1/cits"});
  CHECK(reg.resolve_producer(std::nullopt).mec_id == "mec-1");

  reg.register_mec({"mec-2", "127.0.0.1:5681", "cloud/mec-2/cits"});
  CHECK(reg.resolve_producer(std::string("mec-2")).broker_address == "127.0.0.1:5681");
  CHECK_THROWS_AS(reg.resolve_producer(std::string("mec-9")), NotFoundError);
  CHECK_THROWS_AS(reg.register_mec({"mec-1", "x", "y"}), std::invalid_argument);

  // Round-robin across the two entries when no preference is expressed.
  const auto first = reg.resolve_producer(std::nullopt).mec_id;
  const auto second = reg.resolve_producer(std::nullopt).mec_id;
  CHECK(first != second);
}

TEST_CASE("registry resolves consumers by the topic naming rule") {
  Registry reg;
  reg.set_cloud_address("127.0.0.1:5690");
  reg.register_mec({"mec-1", "127.0.0.1:5680", "cloud/mec-1/cits"});
  const auto route = reg.resolve_consumer("mec-1", "cits");
  CHECK(route.cloud_topic == "cloud/mec-1/cits");
  CHECK(route.cloud_address == "127.0.0.1:5690");
  const auto again = reg.resolve_consumer("mec-1", "cits");
  CHECK(again.cloud_topic == route.cloud_topic);  // idempotent
  CHECK_THROWS_AS(reg.resolve_consumer("mec-9", "cits"), NotFoundError);
}

TEST_CASE("a poller reading from zero consumes exactly the log length") {
  CloudLogCore log;
  const std::uint64_t total = 257;
  for (std::uint64_t i = 0; i < total; ++i) {
    log.append("t", msg_for(1, i));
  }
  std::uint64_t offset = 0;
  std::uint64_t read = 0;
  while (offset < log.end_offset("t")) {
    const auto batch = log.fetch("t", offset, 10);
    read += batch.size();
    offset += batch.size();
  }
  CHECK(read == total);
}

}  // TEST_SUITE
