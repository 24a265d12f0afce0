#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "edgebench/netem.hpp"

using namespace edgebench;

TEST_SUITE("netem") {

TEST_CASE("identity link delivers at the send instant") {
  LinkState link(LinkProfile{0, 0, 0, 0, 1});
  for (double t : {0.0, 5.0, 5.0, 123.456}) {
    CHECK(link.offer(1280, t) == t);
  }
}

TEST_CASE("symmetric 12.5 ms legs echo at 25 ms round trip") {
  LinkProfile leg{12.5, 0, 0, 0, 1};
  LinkState up(leg), down(leg);
  const double sent = 100.0;
  const double at_far_end = *up.offer(0, sent);
  const double back = *down.offer(0, at_far_end);
  CHECK(back - sent == 25.0);
}

TEST_CASE("serialization of 1280 bytes at 100 Mbit/s adds 0.1024 ms") {
  const LinkProfile profile{0, 0, 100.0, 0, 1};
  CHECK(serialization_ms(profile, 1280) == 0.1024);
  LinkState link(profile);
  CHECK(link.offer(1280, 10.0) == 10.1024);
}

TEST_CASE("below saturation the added latency is delay plus serialization exactly") {
  const LinkProfile profile{5.0, 0, 100.0, 0, 1};
  LinkState link(profile);
  // One frame every 10 ms; each takes 0.1024 ms on the line, so no queueing.
  for (int k = 0; k < 1000; ++k) {
    const double sent = k * 10.0;
    CHECK(*link.offer(1280, sent) == sent + 0.1024 + 5.0);
  }
}

TEST_CASE("deliveries never reorder even with heavy jitter") {
  LinkState link(LinkProfile{2.0, 50.0, 0, 0, 7});
  double prev = -1;
  for (int k = 0; k < 10000; ++k) {
    const double d = *link.offer(100, k * 0.5);
    CHECK(d >= prev);
    prev = d;
  }
}

TEST_CASE("offered load above bandwidth grows the queueing delay monotonically") {
  // 1280 B frames back-to-back at 2x the line rate.
  LinkState link(LinkProfile{0, 0, 100.0, 0, 1});
  double prev_delay = 0;
  for (int k = 0; k < 2000; ++k) {
    const double sent = k * 0.0512;  // half the serialization time
    const double delay = *link.offer(1280, sent) - sent;
    CHECK(delay >= prev_delay);
    prev_delay = delay;
  }
  CHECK(prev_delay > 50.0);  // backlog kept growing
}

TEST_CASE("same seed reproduces the delivery schedule bit-exact") {
  const LinkProfile profile{7.5, 9.5, 100.0, 1.0, 42};
  LinkState a(profile), b(profile);
  LinkState c(LinkProfile{7.5, 9.5, 100.0, 1.0, 43});
  bool diverged = false;
  for (int k = 0; k < 5000; ++k) {
    const double sent = k * 2.0;
    const auto da = a.offer(1280, sent);
    const auto db = b.offer(1280, sent);
    const auto dc = c.offer(1280, sent);
    CHECK(da == db);
    if (da != dc) {
      diverged = true;
    }
  }
  CHECK(diverged);
}

TEST_CASE("random loss drops close to the configured fraction") {
  LinkState link(LinkProfile{0, 0, 0, 25.0, 99});
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    link.offer(64, k * 1.0);
  }
  const double drop_pct = 100.0 * static_cast<double>(link.dropped_count()) / n;
  CHECK(drop_pct > 22.0);
  CHECK(drop_pct < 28.0);
}

TEST_CASE("default profiles carry the measured throughput caps") {
  const DefaultProfiles p = default_profiles();
  CHECK(p.uplink_5g.bandwidth_mbps == 100.0);
  CHECK(p.downlink_5g.bandwidth_mbps == 152.0);
  CHECK(p.wan.base_delay_ms == 5.0);
  CHECK(p.wan.jitter_ms == 1.0);
  CHECK(p.wan.bandwidth_mbps == 1000.0);
  CHECK(p.uplink_5g.random_loss_pct == 0.0);
}

TEST_CASE("echo probes through the default 5G legs match the observed RTT band") {
  DefaultProfiles p = default_profiles();
  p.uplink_5g.seed = 4242;
  p.downlink_5g.seed = 2424;
  LinkState up(p.uplink_5g), down(p.downlink_5g);
  const int n = 10000;
  double sum = 0, lo = 1e9, hi = -1e9;
  for (int k = 0; k < n; ++k) {
    const double sent = k * 100.0;  // spaced out, no queueing
    const double rtt = *down.offer(0, *up.offer(0, sent)) - sent;
    sum += rtt;
    lo = std::min(lo, rtt);
    hi = std::max(hi, rtt);
  }
  CHECK(sum / n > 23.0);
  CHECK(sum / n < 26.0);
  CHECK(lo >= 15.0);
  CHECK(hi <= 34.0);
}

}  // TEST_SUITE
