#include <cstdio>
#include <string>

#include "doctest.h"
#include "edgebench/workload.hpp"

using namespace edgebench;

TEST_SUITE("workload") {

TEST_CASE("planned send counts follow rate x duration") {
  ProducerConfig cfg;
  cfg.rate_hz = 2.0;
  cfg.duration_s = 600.0;
  CHECK(planned_send_count(cfg) == 1200);
  cfg.duration_s = 60.0;
  CHECK(planned_send_count(cfg) == 120);
  cfg.rate_hz = 1.5;
  cfg.duration_s = 10.0;
  CHECK(planned_send_count(cfg) == 15);
}

TEST_CASE("send offsets are fixed-interval with no drift") {
  ProducerConfig cfg;
  cfg.rate_hz = 2.0;
  CHECK(send_offset_ms(cfg, 0) == 0.0);
  CHECK(send_offset_ms(cfg, 1) == 500.0);
  CHECK(send_offset_ms(cfg, 119) == 59500.0);
  cfg.rate_hz = 0.4;
  CHECK(send_offset_ms(cfg, 3) == 7500.0);
}

TEST_CASE("config validation rejects nonsense") {
  ProducerConfig cfg;
  cfg.rate_hz = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.rate_hz = 2;
  cfg.duration_s = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.duration_s = 60;
  cfg.topic = "";
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.topic = "cits";
  cfg.producer_id = kControlProducerId;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.producer_id = 1;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("messages carry the configured identity and payload size") {
  ProducerConfig cfg;
  cfg.producer_id = 12;
  cfg.payload_bytes = 1280;
  cfg.seed = 5;
  const CitsMessage m = make_message(cfg, 3, 1700000000123);
  CHECK(m.producer_id == 12);
  CHECK(m.sequence == 3);
  CHECK(m.origin_time_ms == 1700000000123);
  CHECK(m.topic == "cits");
  CHECK(m.payload.size() == 1280);
  CHECK(make_message(cfg, 3, 1700000000123) == m);  // deterministic
  CHECK(make_message(cfg, 4, 1700000000123).payload != m.payload);
}

TEST_CASE("sent log csv round-trips") {
  SentLog log;
  log.entries.push_back({1, 1700000000000, 0});
  log.entries.push_back({1, 1700000000500, 1});
  log.entries.push_back({2, 1700000000100, 0});
  const std::string path = "sent_roundtrip.csv";
  write_sent_csv(path, log);
  const SentLog back = load_sent_csv(path);
  REQUIRE(back.entries.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.entries[i] == log.entries[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("received log csv round-trips with flags") {
  ReceivedLog log;
  log.entries.push_back({{1, 1700000000000, 0}, 1700000000640});
  log.entries.push_back({{1, 1700000000500, 1}, 1700000001140});
  log.timed_out = true;
  log.late_start = true;
  const std::string path = "received_roundtrip.csv";
  write_received_csv(path, log);
  const ReceivedLog back = load_received_csv(path);
  REQUIRE(back.entries.size() == 2);
  CHECK(back.timed_out);
  CHECK(back.late_start);
  CHECK(back.entries[0].key == log.entries[0].key);
  CHECK(back.entries[0].receive_time_ms == 1700000000640);
  CHECK(back.entries[1].receive_time_ms == 1700000001140);
  std::remove(path.c_str());

  // Flags default off.
  ReceivedLog plain;
  plain.entries.push_back({{3, 10, 0}, 20});
  write_received_csv(path, plain);
  const ReceivedLog plain_back = load_received_csv(path);
  CHECK_FALSE(plain_back.timed_out);
  CHECK_FALSE(plain_back.late_start);
  std::remove(path.c_str());
}

TEST_CASE("csv loader reports the offending line") {
  const std::string path = "bad.csv";
  std::FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("producer_id,sequence,origin_time_ms\n1,2\n", f);
  std::fclose(f);
  try {
    load_sent_csv(path);
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    CHECK(what.find("bad.csv:2") != std::string::npos);
  }
  std::remove(path.c_str());
}

TEST_CASE("merging keeps all records and unique keys stay unique") {
  SentLog a, b;
  a.entries.push_back({1, 100, 0});
  a.entries.push_back({1, 600, 1});
  b.entries.push_back({2, 100, 0});
  const SentLog merged = merge_sent({a, b});
  CHECK(merged.entries.size() == 3);

  ReceivedLog ra, rb;
  ra.entries.push_back({{1, 100, 0}, 200});
  rb.timed_out = true;
  const ReceivedLog rm = merge_received({ra, rb});
  CHECK(rm.entries.size() == 1);
  CHECK(rm.timed_out);
  CHECK_FALSE(rm.late_start);
}

}  // TEST_SUITE
