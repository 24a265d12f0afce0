#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "edgebench/bench.hpp"
#include "edgebench/cloud.hpp"
#include "edgebench/edge_broker.hpp"
#include "edgebench/metrics.hpp"
#include "edgebench/runner.hpp"
#include "edgebench/scenario.hpp"
#include "edgebench/servers.hpp"

namespace fs = std::filesystem;
using namespace edgebench;

namespace {

std::string self_exe() {
  std::error_code ec;
  const fs::path p = fs::read_symlink("/proc/self/exe", ec);
  return ec ? std::string() : p.string();
}

// Converts an absolute wall-clock start (ms since the Unix epoch) into this
// process's steady clock so components on one host fire together.
std::chrono::steady_clock::time_point steady_start_from_wall(long long start_at_ms) {
  const auto now_wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count();
  return std::chrono::steady_clock::now() + std::chrono::milliseconds(start_at_ms - now_wall);
}

struct RunFlags {
  std::string scenario = "all";
  std::string config_path;
  double duration = 60.0;
  int repetitions = 3;
  std::uint32_t producers = 1;
  double rate = 2.0;
  std::uint32_t payload = 1280;
  std::string scheme;
  std::string platform;
  std::uint64_t seed = 42;
  std::string out = "out";
  bool sim_time = false;
  bool paper_scale = false;
  bool no_netem = false;
  bool distributed = false;
  std::string sampler;
  std::string median;
  std::string sigma;
  double poll_interval_ms = 10.0;
  std::uint64_t broker_capacity = EdgeBrokerCore::kDefaultCapacity;
  double idle_timeout = 30.0;
  double clock_skew_ms = 0.0;
};

int cmd_run(const CLI::App& sub, const RunFlags& f) {
  RunOptions opt;
  std::string selector = "all";
  if (sub.count("--config") > 0) {
    const ConfigFile file = load_config(f.config_path);
    opt = file.options;
    if (file.scenario_selector) selector = *file.scenario_selector;
  }

  const auto given = [&sub](const std::string& name) { return sub.count(name) > 0; };
  if (given("--scenario")) selector = f.scenario;
  if (given("--duration")) opt.duration_s = f.duration;
  if (given("--repetitions")) opt.repetitions = f.repetitions;
  if (given("--producers")) opt.producers_override = f.producers;
  if (given("--rate")) opt.rate_hz = f.rate;
  if (given("--payload")) opt.payload_bytes = f.payload;
  if (given("--scheme")) opt.scheme_override = scheme_by_name(f.scheme).name;
  if (given("--platform")) {
    platform_by_name(f.platform);  // validation only
    opt.platform_override = f.platform;
  }
  if (given("--seed")) opt.seed = f.seed;
  if (given("--out")) opt.out_dir = f.out;
  if (given("--sim-time")) opt.sim_time = true;
  if (given("--paper-scale")) opt.paper_scale = true;
  if (given("--no-netem")) opt.no_netem = true;
  if (given("--distributed")) opt.distributed = true;
  if (given("--sampler")) opt.sampler = sampler_mode_by_name(f.sampler);
  if (given("--median")) opt.median_policy = median_policy_by_name(f.median);
  if (given("--sigma")) opt.sigma_policy = sigma_policy_by_name(f.sigma);
  if (given("--poll-interval-ms")) opt.poll_interval_ms = f.poll_interval_ms;
  if (given("--broker-capacity")) opt.broker_capacity = f.broker_capacity;
  if (given("--idle-timeout")) opt.idle_timeout_s = f.idle_timeout;
  if (given("--clock-skew-ms")) opt.clock_skew_ms = f.clock_skew_ms;

  if (opt.sim_time && opt.distributed) {
    throw std::runtime_error("--sim-time and --distributed are mutually exclusive");
  }
  if (opt.distributed) {
    opt.helper_exe = self_exe();
    if (opt.helper_exe.empty()) {
      throw std::runtime_error("cannot locate own binary for distributed components");
    }
  }

  const std::vector<Scenario> scenarios = select_scenarios(selector);
  const SuiteOutcome suite = run_suite(scenarios, opt);
  std::cout << suite.table;
  return suite.all_pass ? 0 : 1;
}

int cmd_analyze(const std::string& dir, const std::string& median, const std::string& sigma,
                const std::string& scheme, double rate) {
  std::vector<SentLog> sent_logs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("sent_", 0) == 0 && entry.path().extension() == ".csv") {
      sent_logs.push_back(load_sent_csv(entry.path().string()));
    }
  }
  if (sent_logs.empty()) throw std::runtime_error("no sent_*.csv logs in " + dir);
  const SentLog sent = merge_sent(sent_logs);

  ReceivedLog received;
  const fs::path received_path = fs::path(dir) / "received_consumer1.csv";
  if (fs::exists(received_path)) received = load_received_csv(received_path.string());

  const fs::path pseud_path = fs::path(dir) / "pseudonyms_stage.csv";
  if (fs::exists(pseud_path)) {
    const auto pairs = load_pseudonyms_csv(pseud_path.string());
    for (ReceivedRecord& rec : received.entries) {
      for (const auto& [pseud, orig] : pairs) {
        if (rec.key.producer_id == pseud) {
          rec.key.producer_id = orig;
          break;
        }
      }
    }
  }

  const PacketLossResult loss = compute_packet_loss(sent, received);
  const std::vector<LatencySample> samples = compute_latencies(received);

  nlohmann::json doc;
  doc["sent_count"] = loss.sent_count;
  doc["received_count"] = loss.matched_count;
  doc["duplicate_count"] = loss.duplicate_count;
  doc["anomaly_count"] = loss.anomalies.size();
  doc["loss_pct"] = loss.loss_pct;
  if (!samples.empty()) {
    const Summary latency =
        summarize(samples, median_policy_by_name(median), sigma_policy_by_name(sigma));
    doc["latency"] = {{"mean_ms", latency.mean_ms},
                      {"median_ms", latency.median_ms},
                      {"sigma_ms", latency.sigma_ms},
                      {"count", latency.count}};
  }
  nlohmann::json flags = nlohmann::json::array();
  if (received.timed_out) flags.push_back("timeout");
  if (received.late_start) flags.push_back("late-start");
  doc["flags"] = std::move(flags);
  if (!scheme.empty()) {
    const PredictionVerdict verdict =
        compare_to_prediction(loss.loss_pct, scheme_by_name(scheme), rate, sent_logs.size() > 1);
    doc["verdict"] = {{"pass", verdict.pass},
                      {"measured_pct", verdict.measured_pct},
                      {"predicted_pct", verdict.predicted_pct},
                      {"delta", verdict.delta},
                      {"tolerance", verdict.tolerance}};
  }
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_edge_broker(std::uint16_t port, std::uint64_t capacity) {
  EdgeBrokerCore broker(capacity);
  EdgeBrokerServer server(broker, port);
  std::printf("PORT %u\n", server.port());
  std::fflush(stdout);
  server.wait();
  server.stop();
  return 0;
}

int cmd_cloud_broker(std::uint16_t port) {
  CloudLogCore log;
  Registry registry;
  CloudServer server(log, registry, port);
  std::printf("PORT %u\n", server.port());
  std::fflush(stdout);
  server.wait();
  server.stop();
  return 0;
}

int cmd_stage(const std::string& broker, const std::string& cloud, const std::string& scheme,
              const std::string& sampler, bool pseudonymize, std::uint64_t salt,
              const std::string& out_dir) {
  StageCore::Config cfg;
  cfg.scheme = scheme_by_name(scheme);
  cfg.sampler_mode = sampler_mode_by_name(sampler);
  cfg.pseudonymize = pseudonymize;
  cfg.salt = salt;
  StageCore stage(cfg);

  int rc = 0;
  try {
    stage_component(stage, broker, cloud, std::chrono::steady_clock::now());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "stage: %s\n", e.what());
    rc = 1;
  }

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (const auto& [orig, pseud] : stage.pseudonyms().mapping()) pairs.emplace_back(pseud, orig);
  std::sort(pairs.begin(), pairs.end());
  if (!pairs.empty()) {
    write_pseudonyms_csv((fs::path(out_dir) / "pseudonyms_stage.csv").string(), pairs);
  }

  const StageCore::Counters& c = stage.counters();
  nlohmann::json doc;
  doc["arrived"] = c.arrived;
  doc["sampled_out"] = c.sampled_out;
  doc["queue_drops"] = c.queue_drops;
  doc["forwarded"] = c.forwarded;
  doc["retry_drops"] = c.retry_drops;
  doc["depth"] = stage.queue_depth();
  std::ofstream stats((fs::path(out_dir) / "stage_stats.json").string(), std::ios::trunc);
  stats << doc.dump(2) << "\n";
  return stats ? rc : 1;
}

int cmd_producer(const std::string& cloud, std::uint32_t id, double rate, std::uint32_t payload,
                 double duration, std::uint64_t seed, double skew_ms, long long start_at_ms,
                 const std::string& out_dir) {
  ProducerConfig pc;
  pc.producer_id = id;
  pc.rate_hz = rate;
  pc.payload_bytes = payload;
  pc.duration_s = duration;
  pc.seed = seed;
  pc.clock_skew_ms = skew_ms;
  pc.validate();

  SentLog log;
  int rc = 0;
  try {
    producer_component(pc, cloud, steady_start_from_wall(start_at_ms), log);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "producer %u: %s\n", id, e.what());
    rc = 1;
  }
  write_sent_csv((fs::path(out_dir) / ("sent_" + std::to_string(id) + ".csv")).string(), log);
  return rc;
}

int cmd_consumer(const std::string& cloud, const std::string& mec, const std::string& type,
                 double poll_ms, double idle_timeout_s, double delay_ms, long long start_at_ms,
                 const std::string& out_dir) {
  ReceivedLog log;
  bool got_control = false;
  int rc = 0;
  try {
    consumer_component(cloud, mec, type, poll_ms, idle_timeout_s, delay_ms,
                       steady_start_from_wall(start_at_ms), log, got_control);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "consumer: %s\n", e.what());
    rc = 1;
  }
  log.late_start = delay_ms > 0;
  write_received_csv((fs::path(out_dir) / "received_consumer1.csv").string(), log);
  if (rc == 0 && !got_control && !log.timed_out) rc = 1;  // stream never terminated cleanly
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edge/cloud messaging pipeline benchmark"};
  app.require_subcommand(1);

  RunFlags f;
  CLI::App* run = app.add_subcommand("run", "run benchmark scenarios");
  run->add_option("--scenario", f.scenario, "scenario id I..VIII or 'all'");
  run->add_option("--config", f.config_path, "key/value config file")->check(CLI::ExistingFile);
  run->add_option("--duration", f.duration, "seconds of traffic per repetition");
  run->add_option("--repetitions", f.repetitions, "repetitions per scenario");
  run->add_option("--producers", f.producers, "override producer count");
  run->add_option("--rate", f.rate, "per-producer send rate (Hz)");
  run->add_option("--payload", f.payload, "payload bytes per message");
  run->add_option("--scheme", f.scheme, "override scheme: small|medium|large|none");
  run->add_option("--platform", f.platform, "override platform: hybrid|local");
  run->add_option("--seed", f.seed, "base RNG seed");
  run->add_option("--out", f.out, "output directory");
  run->add_flag("--sim-time", f.sim_time, "deterministic virtual-clock run");
  run->add_flag("--paper-scale", f.paper_scale, "600 s x 10 repetitions");
  run->add_flag("--no-netem", f.no_netem, "disable link shaping");
  run->add_flag("--distributed", f.distributed, "one OS process per component");
  run->add_option("--sampler", f.sampler, "sampling gate policy: first|last");
  run->add_option("--median", f.median, "median policy: average|lower");
  run->add_option("--sigma", f.sigma, "sigma policy: population|sample");
  run->add_option("--poll-interval-ms", f.poll_interval_ms, "consumer poll interval");
  run->add_option("--broker-capacity", f.broker_capacity, "edge broker queue bound");
  run->add_option("--idle-timeout", f.idle_timeout, "consumer idle timeout (s)");
  run->add_option("--clock-skew-ms", f.clock_skew_ms, "producer clock skew injection");

  std::string an_dir, an_median = "average", an_sigma = "population", an_scheme;
  double an_rate = 2.0;
  CLI::App* analyze = app.add_subcommand("analyze", "recompute metrics from CSV logs");
  analyze->add_option("dir", an_dir, "repetition directory with sent/received logs")->required();
  analyze->add_option("--median", an_median, "median policy");
  analyze->add_option("--sigma", an_sigma, "sigma policy");
  analyze->add_option("--scheme", an_scheme, "scheme for a prediction verdict");
  analyze->add_option("--rate", an_rate, "per-producer rate the logs were made with");

  std::uint16_t eb_port = kDefaultEdgePort;
  std::uint64_t eb_capacity = EdgeBrokerCore::kDefaultCapacity;
  CLI::App* edge = app.add_subcommand("edge-broker", "edge broker server");
  edge->add_option("--port", eb_port, "listen port (0 = ephemeral, announced on stdout)");
  edge->add_option("--capacity", eb_capacity, "per-topic queue bound");

  std::uint16_t cb_port = kDefaultCloudPort;
  CLI::App* cloud = app.add_subcommand("cloud-broker", "cloud log + registry server");
  cloud->add_option("--port", cb_port, "listen port (0 = ephemeral, announced on stdout)");

  std::string st_broker, st_cloud, st_scheme = "None", st_sampler = "first", st_out = ".";
  bool st_pseudonymize = false;
  std::uint64_t st_salt = 0;
  CLI::App* stage = app.add_subcommand("stage", "anonymization stage between brokers");
  stage->add_option("--broker", st_broker, "edge broker host:port")->required();
  stage->add_option("--cloud", st_cloud, "cloud host:port for appends")->required();
  stage->add_option("--scheme", st_scheme, "small|medium|large|none");
  stage->add_option("--sampler", st_sampler, "first|last");
  stage->add_option("--pseudonymize", st_pseudonymize, "rewrite producer ids");
  stage->add_option("--salt", st_salt, "pseudonym salt");
  stage->add_option("--out", st_out, "directory for stats and pseudonym map");

  std::string pr_cloud, pr_out = ".";
  std::uint32_t pr_id = 1, pr_payload = 1280;
  double pr_rate = 2.0, pr_duration = 60.0, pr_skew = 0.0;
  std::uint64_t pr_seed = 0;
  long long pr_start = 0;
  CLI::App* producer = app.add_subcommand("producer", "fixed-rate message producer");
  producer->add_option("--cloud", pr_cloud, "cloud host:port for broker resolution")->required();
  producer->add_option("--id", pr_id, "producer id");
  producer->add_option("--rate", pr_rate, "send rate (Hz)");
  producer->add_option("--payload", pr_payload, "payload bytes");
  producer->add_option("--duration", pr_duration, "seconds of traffic");
  producer->add_option("--seed", pr_seed, "payload seed");
  producer->add_option("--skew-ms", pr_skew, "clock skew added to origin stamps");
  producer->add_option("--start-at-ms", pr_start, "wall-clock start, ms since epoch")->required();
  producer->add_option("--out", pr_out, "directory for the sent log");

  std::string co_cloud, co_mec = kMecId, co_type = "cits", co_out = ".";
  double co_poll = 10.0, co_idle = 30.0, co_delay = 0.0;
  long long co_start = 0;
  CLI::App* consumer = app.add_subcommand("consumer", "polling consumer");
  consumer->add_option("--cloud", co_cloud, "cloud host:port for route resolution")->required();
  consumer->add_option("--mec", co_mec, "mec id to read");
  consumer->add_option("--type", co_type, "data type to read");
  consumer->add_option("--poll-ms", co_poll, "poll interval");
  consumer->add_option("--idle-timeout", co_idle, "idle timeout (s)");
  consumer->add_option("--delay-ms", co_delay, "start delay after the common start");
  consumer->add_option("--start-at-ms", co_start, "wall-clock start, ms since epoch")->required();
  consumer->add_option("--out", co_out, "directory for the received log");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(*run, f);
    if (analyze->parsed()) return cmd_analyze(an_dir, an_median, an_sigma, an_scheme, an_rate);
    if (edge->parsed()) return cmd_edge_broker(eb_port, eb_capacity);
    if (cloud->parsed()) return cmd_cloud_broker(cb_port);
    if (stage->parsed()) {
      return cmd_stage(st_broker, st_cloud, st_scheme, st_sampler, st_pseudonymize, st_salt,
                       st_out);
    }
    if (producer->parsed()) {
      return cmd_producer(pr_cloud, pr_id, pr_rate, pr_payload, pr_duration, pr_seed, pr_skew,
                          pr_start, pr_out);
    }
    if (consumer->parsed()) {
      return cmd_consumer(co_cloud, co_mec, co_type, co_poll, co_idle, co_delay, co_start, co_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "edgebench: error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
