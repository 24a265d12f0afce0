#include <chrono>
#include <deque>
#include <thread>
#include <vector>

#include "doctest.h"
#include "edgebench/edge_broker.hpp"
#include "edgebench/rng.hpp"

using namespace edgebench;
using namespace std::chrono_literals;

namespace {

CitsMessage msg_for(std::uint32_t producer, std::uint64_t seq) {
  CitsMessage m;
  m.producer_id = producer;
  m.sequence = seq;
  m.origin_time_ms = 1000 + static_cast<TimeMs>(seq);
  m.topic = "cits";
  return m;
}

}  // namespace

TEST_SUITE("edge_broker") {

TEST_CASE("under capacity everything is accepted and drains in order") {
  EdgeBrokerCore broker;
  broker.set_capacity("cits", 10);
  auto sub = broker.subscribe("cits");
  for (std::uint64_t i = 0; i < 5; ++i) {
    CHECK(broker.publish("cits", msg_for(1, i)) == PublishResult::Accepted);
  }
  for (std::uint64_t i = 0; i < 5; ++i) {
    auto got = broker.try_next("cits", sub);
    REQUIRE(got.has_value());
    CHECK(got->sequence == i);
  }
  CHECK_FALSE(broker.try_next("cits", sub).has_value());
}

TEST_CASE("capacity 1 with a stalled subscriber rejects the overflow") {
  EdgeBrokerCore broker;
  broker.set_capacity("cits", 1);
  broker.subscribe("cits");  // never consumes
  CHECK(broker.publish("cits", msg_for(1, 0)) == PublishResult::Accepted);
  CHECK(broker.publish("cits", msg_for(1, 1)) == PublishResult::Rejected);
  CHECK(broker.publish("cits", msg_for(1, 2)) == PublishResult::Rejected);
  const TopicStats st = broker.stats("cits");
  CHECK(st.accepted == 1);
  CHECK(st.rejected == 2);
  CHECK(st.published == 3);
  CHECK(st.depth == 1);
}

TEST_CASE("fresh topics auto-create and retain until a subscriber attaches") {
  EdgeBrokerCore broker;
  CHECK(broker.publish("brand/new", msg_for(7, 0)) == PublishResult::Accepted);
  auto sub = broker.subscribe("brand/new");
  auto got = broker.try_next("brand/new", sub);
  REQUIRE(got.has_value());
  CHECK(got->producer_id == 7);
}

TEST_CASE("publish a,b,c then subscribe-and-drain yields a,b,c") {
  EdgeBrokerCore broker;
  for (std::uint64_t i = 0; i < 3; ++i) {
    broker.publish("cits", msg_for(1, i));
  }
  auto sub = broker.subscribe("cits");
  for (std::uint64_t i = 0; i < 3; ++i) {
    auto got = broker.try_next("cits", sub);
    REQUIRE(got.has_value());
    CHECK(got->sequence == i);
  }
}

TEST_CASE("fan-out delivers every accepted message to each subscriber") {
  EdgeBrokerCore broker;
  auto a = broker.subscribe("cits");
  auto b = broker.subscribe("cits");
  for (std::uint64_t i = 0; i < 4; ++i) {
    broker.publish("cits", msg_for(1, i));
  }
  for (std::uint64_t i = 0; i < 4; ++i) {
    CHECK(broker.try_next("cits", a)->sequence == i);
  }
  CHECK(broker.stats("cits").delivered == 0);  // b has not passed anything yet
  for (std::uint64_t i = 0; i < 4; ++i) {
    CHECK(broker.try_next("cits", b)->sequence == i);
  }
  CHECK(broker.delivered_to("cits", a) == 4);
  CHECK(broker.delivered_to("cits", b) == 4);
  CHECK(broker.stats("cits").delivered == 4);
  CHECK(broker.stats("cits").depth == 0);
}

TEST_CASE("subscribing to a never-published topic yields nothing until first publish") {
  EdgeBrokerCore broker;
  auto sub = broker.subscribe("quiet");
  CHECK_FALSE(broker.try_next("quiet", sub).has_value());
  broker.publish("quiet", msg_for(3, 0));
  CHECK(broker.try_next("quiet", sub).has_value());
}

TEST_CASE("stats arithmetic matches the consumed/rejected tally") {
  EdgeBrokerCore broker;
  broker.set_capacity("cits", 5);
  auto sub = broker.subscribe("cits");
  for (std::uint64_t i = 0; i < 7; ++i) {
    broker.publish("cits", msg_for(1, i));  // 5 accepted, 2 rejected
  }
  for (int i = 0; i < 3; ++i) {
    broker.try_next("cits", sub);
  }
  const TopicStats st = broker.stats("cits");
  CHECK(st.accepted == 5);
  CHECK(st.rejected == 2);
  CHECK(st.delivered == 3);
  CHECK(st.depth == 2);
  CHECK(st.published == st.accepted + st.rejected);
}

TEST_CASE("unknown topics report zeroed stats") {
  EdgeBrokerCore broker;
  const TopicStats st = broker.stats("nope");
  CHECK(st.published == 0);
  CHECK(st.accepted == 0);
  CHECK(st.rejected == 0);
  CHECK(st.delivered == 0);
  CHECK(st.depth == 0);
}

TEST_CASE("randomized interleaving keeps counters conserved and FIFO intact") {
  EdgeBrokerCore broker;
  broker.set_capacity("cits", 16);
  auto sub = broker.subscribe("cits");
  SplitMix64 rng(1234);
  std::uint64_t next_seq = 0;
  std::deque<std::uint64_t> accepted_seqs;
  TopicStats prev;
  for (int step = 0; step < 10000; ++step) {
    if (rng.next_u64() % 2 == 0) {
      if (broker.publish("cits", msg_for(1, next_seq)) == PublishResult::Accepted) {
        accepted_seqs.push_back(next_seq);
      }
      ++next_seq;
    } else if (auto got = broker.try_next("cits", sub)) {
      REQUIRE_FALSE(accepted_seqs.empty());
      CHECK(got->sequence == accepted_seqs.front());
      accepted_seqs.pop_front();
    }
    const TopicStats st = broker.stats("cits");
    CHECK(st.published == st.accepted + st.rejected);
    CHECK(st.accepted == st.delivered + st.depth);
    CHECK(st.depth <= 16);
    // Monotonicity across successive polls.
    CHECK(st.published >= prev.published);
    CHECK(st.accepted >= prev.accepted);
    CHECK(st.rejected >= prev.rejected);
    CHECK(st.delivered >= prev.delivered);
    prev = st;
  }
}

TEST_CASE("blocking next wakes on publish, timeout, and shutdown") {
  EdgeBrokerCore broker;
  auto sub = broker.subscribe("cits");
  CitsMessage out;

  CHECK(broker.next("cits", sub, out, 30ms) == EdgeBrokerCore::WaitStatus::Timeout);

  std::thread publisher([&] {
    std::this_thread::sleep_for(20ms);
    broker.publish("cits", msg_for(1, 0));
  });
  CHECK(broker.next("cits", sub, out, 2000ms) == EdgeBrokerCore::WaitStatus::Message);
  CHECK(out.sequence == 0);
  publisher.join();

  std::thread stopper([&] {
    std::this_thread::sleep_for(20ms);
    broker.shutdown();
  });
  CHECK(broker.next("cits", sub, out, 2000ms) == EdgeBrokerCore::WaitStatus::Shutdown);
  stopper.join();
  CHECK(broker.is_shutdown());
}

TEST_CASE("externally reported stage counters surface under their pseudo-topic") {
  EdgeBrokerCore broker;
  broker.report_external_stats("cits.stage", 100, 7, 3);
  const TopicStats st = broker.stats("cits.stage");
  CHECK(st.accepted == 100);
  CHECK(st.rejected == 7);
  CHECK(st.depth == 3);
}

TEST_CASE("unsubscribe releases retention so messages retire") {
  EdgeBrokerCore broker;
  auto a = broker.subscribe("cits");
  auto b = broker.subscribe("cits");
  for (std::uint64_t i = 0; i < 3; ++i) {
    broker.publish("cits", msg_for(1, i));
  }
  for (std::uint64_t i = 0; i < 3; ++i) {
    broker.try_next("cits", a);
  }
  CHECK(broker.stats("cits").depth == 3);  // b still holds them
  broker.unsubscribe("cits", b);
  CHECK(broker.stats("cits").depth == 0);
  CHECK(broker.stats("cits").delivered == 3);
}

TEST_CASE("topic names come back sorted") {
  EdgeBrokerCore broker;
  broker.publish("zeta", msg_for(1, 0));
  broker.publish("alpha", msg_for(1, 1));
  broker.publish("mid", msg_for(1, 2));
  const auto names = broker.topic_names();
  REQUIRE(names.size() == 3);
  CHECK(names[0] == "alpha");
  CHECK(names[1] == "mid");
  CHECK(names[2] == "zeta");
}

}  // TEST_SUITE
