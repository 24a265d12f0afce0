#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "edgebench/scenario.hpp"

using namespace edgebench;

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

std::string capture_config_error(const std::string& path, const std::string& text) {
  write_file(path, text);
  std::string message;
  try {
    load_config(path);
  } catch (const std::exception& e) {
    message = e.what();
  }
  std::remove(path.c_str());
  return message;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("canonical table holds the eight benchmark configurations") {
  const std::vector<Scenario>& all = canonical_scenarios();
  REQUIRE(all.size() == 8);

  const char* ids[] = {"I", "II", "III", "IV", "V", "VI", "VII", "VIII"};
  const char* schemes[] = {"Small", "Medium", "Large", "None", "Small", "Medium", "Large", "None"};
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(all[i].id == ids[i]);
    CHECK(all[i].scheme == schemes[i]);
    CHECK(all[i].producers == (i < 4 ? 1u : 10u));
    CHECK(all[i].platform == ((i % 4 == 3) ? Platform::Local : Platform::Hybrid));
    CHECK_NOTHROW(all[i].validate());
  }
}

TEST_CASE("scenario lookup by id and selector") {
  CHECK(scenario_by_id("VI").scheme == "Medium");
  CHECK(scenario_by_id("VI").producers == 10);
  CHECK_THROWS_AS(scenario_by_id("IX"), std::invalid_argument);

  CHECK(select_scenarios("all").size() == 8);
  const std::vector<Scenario> one = select_scenarios("IV");
  REQUIRE(one.size() == 1);
  CHECK(one[0].platform == Platform::Local);
}

TEST_CASE("validation rejects impossible combinations") {
  Scenario s{"x", Platform::Hybrid, "Small", 1};
  CHECK_NOTHROW(s.validate());

  s.producers = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  s.producers = 1;
  s.scheme = "Gigantic";
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  // The local platform forwards transparently, so a sampling scheme there
  // would silently do nothing; it is rejected instead.
  s.scheme = "Small";
  s.platform = Platform::Local;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.scheme = "None";
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("platform names round-trip and are case-insensitive") {
  CHECK(platform_name(Platform::Hybrid) == "hybrid");
  CHECK(platform_name(Platform::Local) == "local");
  CHECK(platform_by_name("HYBRID") == Platform::Hybrid);
  CHECK(platform_by_name("Local") == Platform::Local);
  CHECK_THROWS_AS(platform_by_name("fog"), std::invalid_argument);
}

TEST_CASE("overrides rewrite a scenario and re-validate the result") {
  RunOptions opt;
  opt.producers_override = 4;
  opt.scheme_override = "Large";
  Scenario s = opt.apply_overrides(scenario_by_id("I"));
  CHECK(s.producers == 4);
  CHECK(s.scheme == "Large");
  CHECK(s.platform == Platform::Hybrid);

  // Switching scenario I to the local platform keeps its Small scheme, which
  // the combined result then rejects.
  RunOptions bad;
  bad.platform_override = "local";
  CHECK_THROWS_AS(bad.apply_overrides(scenario_by_id("I")), std::invalid_argument);

  bad.scheme_override = "none";
  CHECK_NOTHROW(bad.apply_overrides(scenario_by_id("I")));
}

TEST_CASE("effective accessors expand the paper-scale and no-netem switches") {
  RunOptions opt;
  CHECK(opt.effective_duration_s() == 60.0);
  CHECK(opt.effective_repetitions() == 3);
  CHECK(opt.effective_links().uplink.base_delay_ms > 0);

  opt.paper_scale = true;
  CHECK(opt.effective_duration_s() == 600.0);
  CHECK(opt.effective_repetitions() == 10);

  opt.no_netem = true;
  const LinkSet links = opt.effective_links();
  CHECK(links.uplink.base_delay_ms == 0);
  CHECK(links.wan.jitter_ms == 0);
  CHECK(links.downlink.bandwidth_mbps == 0);
}

TEST_CASE("config file round-trips every section") {
  const std::string path = "scenario_roundtrip.cfg";
  write_file(path,
             "# benchmark sweep\n"
             "scenario = VII\n"
             "duration = 120\n"
             "repetitions = 5\n"
             "rate = 4.5\n"
             "payload = 256\n"
             "scheme = medium\n"
             "platform = hybrid\n"
             "producers = 3\n"
             "seed = 7\n"
             "out = results\n"
             "sim-time = true\n"
             "paper-scale = no\n"
             "poll-interval-ms = 25\n"
             "broker-capacity = 64\n"
             "sampler = last\n"
             "median = lower\n"
             "sigma = sample\n"
             "idle-timeout = 12\n"
             "clock-skew-ms = -3\n"
             "\n"
             "[links.uplink]\n"
             "base-delay-ms = 9\n"
             "jitter-ms = 2\n"
             "[links.wan]\n"
             "bandwidth-mbps = 500\n"
             "[links.downlink]\n"
             "loss-pct = 1.5\n"
             "seed = 99\n");
  const ConfigFile cfg = load_config(path);
  std::remove(path.c_str());

  REQUIRE(cfg.scenario_selector.has_value());
  CHECK(*cfg.scenario_selector == "VII");
  const RunOptions& opt = cfg.options;
  CHECK(opt.duration_s == 120.0);
  CHECK(opt.repetitions == 5);
  CHECK(opt.rate_hz == 4.5);
  CHECK(opt.payload_bytes == 256);
  CHECK(opt.scheme_override.value() == "Medium");
  CHECK(opt.platform_override.value() == "hybrid");
  CHECK(opt.producers_override.value() == 3);
  CHECK(opt.seed == 7);
  CHECK(opt.out_dir == "results");
  CHECK(opt.sim_time);
  CHECK_FALSE(opt.paper_scale);
  CHECK(opt.poll_interval_ms == 25.0);
  CHECK(opt.broker_capacity == 64);
  CHECK(opt.sampler == SamplerMode::LastInWindow);
  CHECK(opt.median_policy == MedianPolicy::LowerMiddle);
  CHECK(opt.sigma_policy == SigmaPolicy::Sample);
  CHECK(opt.idle_timeout_s == 12.0);
  CHECK(opt.clock_skew_ms == -3.0);
  CHECK(opt.links.uplink.base_delay_ms == 9.0);
  CHECK(opt.links.uplink.jitter_ms == 2.0);
  CHECK(opt.links.wan.bandwidth_mbps == 500.0);
  CHECK(opt.links.downlink.random_loss_pct == 1.5);
  CHECK(opt.links.downlink.seed == 99);
}

TEST_CASE("config errors carry the file and line position") {
  const std::string path = "scenario_bad.cfg";

  std::string msg = capture_config_error(path, "duration = 60\nwibble = 1\n");
  CHECK(msg.find(path + ":2:") != std::string::npos);
  CHECK(msg.find("wibble") != std::string::npos);

  msg = capture_config_error(path, "[links.lan]\n");
  CHECK(msg.find(path + ":1:") != std::string::npos);
  CHECK(msg.find("unknown section") != std::string::npos);

  msg = capture_config_error(path, "duration = fast\n");
  CHECK(msg.find(path + ":1:") != std::string::npos);
  CHECK(msg.find("expected a number") != std::string::npos);

  msg = capture_config_error(path, "just words\n");
  CHECK(msg.find("key = value") != std::string::npos);

  msg = capture_config_error(path, "duration =\n");
  CHECK(msg.find("empty value") != std::string::npos);

  msg = capture_config_error(path, "scheme = giant\n");
  CHECK(msg.find(path + ":1:") != std::string::npos);

  msg = capture_config_error(path, "[links.uplink\n");
  CHECK(msg.find("unterminated") != std::string::npos);

  CHECK_THROWS_AS(load_config("does_not_exist.cfg"), std::runtime_error);
}

}  // TEST_SUITE
