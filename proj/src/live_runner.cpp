#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "edgebench/clients.hpp"
#include "edgebench/clock.hpp"
#include "edgebench/netem_proxy.hpp"
#include "edgebench/runner.hpp"
#include "edgebench/servers.hpp"

namespace edgebench {
namespace {

constexpr const char* kHost = "127.0.0.1";

TimeMs system_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::chrono::steady_clock::duration ms_dur(double ms) {
  return std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double, std::milli>(ms));
}

std::string addr_of(std::uint16_t port) {
  return std::string(kHost) + ":" + std::to_string(port);
}

}  // namespace

void producer_component(const ProducerConfig& pc, const std::string& cloud_address,
                        std::chrono::steady_clock::time_point start, SentLog& log) {
  std::string broker_addr;
  {
    const ParsedAddress cloud = parse_address(cloud_address);
    CloudClient directory(cloud.host, cloud.port);
    broker_addr = directory.resolve_producer(std::nullopt).broker_address;
    directory.close();
  }
  const ParsedAddress addr = parse_address(broker_addr);
  BrokerClient client(addr.host, addr.port);
  const std::size_t n = planned_send_count(pc);
  for (std::size_t k = 0; k < n; ++k) {
    std::this_thread::sleep_until(start + ms_dur(send_offset_ms(pc, k)));
    const TimeMs origin = system_now_ms() + static_cast<TimeMs>(std::llround(pc.clock_skew_ms));
    CitsMessage msg = make_message(pc, k, origin);
    log.entries.push_back(message_key(msg));
    client.publish(pc.topic, msg);  // rejections are counted broker-side
  }
  client.close();
}

void stage_component(StageCore& stage, const std::string& broker_address,
                     const std::string& cloud_address,
                     std::chrono::steady_clock::time_point epoch) {
  const ParsedAddress broker_addr = parse_address(broker_address);
  const ParsedAddress cloud_addr = parse_address(cloud_address);
  BrokerClient sub(broker_addr.host, broker_addr.port);
  sub.subscribe(kDataTopic);
  CloudClient cloud(cloud_addr.host, cloud_addr.port);
  const auto elapsed = [epoch] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - epoch)
        .count();
  };
  const auto report = [&] {
    try {
      BrokerClient stats(broker_addr.host, broker_addr.port);
      const StageCore::Counters& c = stage.counters();
      stats.report_stats(kStageStatsTopic, c.forwarded,
                         c.sampled_out + c.queue_drops + c.retry_drops, stage.queue_depth());
      stats.close();
    } catch (const std::exception&) {
      // broker already gone; the in-process runner reads counters directly
    }
  };
  const auto drain_ready = [&] {
    double now = elapsed();
    while (stage.has_ready(now)) {
      CitsMessage m = stage.pop_ready(now);
      const bool control = m.is_control();
      bool ok = false;
      try {
        ok = cloud.append(kCloudTopic, m).has_value();
      } catch (const std::exception&) {
        ok = false;
      }
      if (ok) {
        stage.count_forwarded();
      } else {
        stage.count_retry_drop();
      }
      // By then every data message has cleared the stage, so this snapshot is
      // the run's final word while the broker is still up.
      if (control) report();
      now = elapsed();
    }
  };

  bool running = true;
  while (running) {
    drain_ready();
    int timeout = 100;
    if (auto nc = stage.next_completion()) {
      const double wait = *nc - elapsed();
      timeout = wait <= 0 ? 0 : static_cast<int>(std::min(100.0, std::ceil(wait)));
    }
    CitsMessage msg;
    switch (sub.next_delivery(msg, timeout)) {
      case BrokerClient::DeliveryStatus::Message: {
        const double now = elapsed();
        // The end marker closes the sampling windows first so held candidates
        // are queued (and land in the log) ahead of it.
        if (msg.is_control()) stage.flush(now);
        stage.on_arrival(msg, now);
        break;
      }
      case BrokerClient::DeliveryStatus::Timeout:
        break;
      case BrokerClient::DeliveryStatus::Shutdown:
      case BrokerClient::DeliveryStatus::Closed:
        running = false;
        break;
    }
  }

  // Shutdown without an end marker still flushes the gate and serves out the
  // queue, so nothing stays unaccounted.
  stage.flush(elapsed());
  while (true) {
    drain_ready();
    if (stage.queue_depth() == 0) break;
    double wait = 1.0;
    if (auto nc = stage.next_completion()) wait = std::max(0.0, *nc - elapsed());
    std::this_thread::sleep_for(ms_dur(std::min(wait, 50.0) + 0.1));
  }
  report();
  sub.close();
  cloud.close();
}

void consumer_component(const std::string& cloud_address, const std::string& mec_id,
                        const std::string& data_type, double poll_interval_ms,
                        double idle_timeout_s, double start_delay_ms,
                        std::chrono::steady_clock::time_point start, ReceivedLog& log,
                        bool& got_control) {
  ConsumerRoute route;
  {
    const ParsedAddress cloud = parse_address(cloud_address);
    CloudClient directory(cloud.host, cloud.port);
    route = directory.resolve_consumer(mec_id, data_type);
    directory.close();
  }
  const ParsedAddress addr = parse_address(route.cloud_address);
  CloudClient client(addr.host, addr.port);
  const auto first_poll = start + ms_dur(start_delay_ms);
  std::this_thread::sleep_until(first_poll);
  auto last_progress = std::chrono::steady_clock::now();
  std::uint64_t next = 0;
  bool done = false;
  for (std::uint64_t n = 1; !done; ++n) {
    std::vector<LogRecord> batch;
    try {
      batch = client.fetch(route.cloud_topic, next, 1000);
    } catch (const NotFoundError&) {
      // nothing has reached the cloud yet
    }
    const TimeMs stamp = system_now_ms();
    for (const LogRecord& rec : batch) {
      ++next;
      if (rec.message.is_control()) {
        got_control = true;
        done = true;
        break;
      }
      log.entries.push_back({message_key(rec.message), stamp});
    }
    if (!batch.empty()) last_progress = std::chrono::steady_clock::now();
    if (done) break;
    if (std::chrono::steady_clock::now() - last_progress >
        std::chrono::duration<double>(idle_timeout_s)) {
      log.timed_out = true;
      break;
    }
    std::this_thread::sleep_until(first_poll + n * ms_dur(poll_interval_ms));
  }
  client.close();
}

RepetitionResult run_repetition_live(const RepetitionConfig& cfg) {
  EdgeBrokerCore broker(cfg.broker_capacity);
  CloudLogCore cloud;
  Registry registry;
  StageCore stage(stage_config(cfg));

  EdgeBrokerServer edge_server(broker, 0);
  CloudServer cloud_server(cloud, registry, 0);

  // Shape exactly the legs the simulated pipeline shapes: publishes on the
  // way up, appends across the WAN, fetch responses on the way down. The
  // opposite directions pass through unshaped.
  const LinkProfile zero{};
  NetemProxy up_proxy(0, kHost, edge_server.port(), seeded_profile(cfg.links.uplink, cfg.seed, 1),
                      zero);
  NetemProxy wan_proxy(0, kHost, cloud_server.port(), seeded_profile(cfg.links.wan, cfg.seed, 2),
                       zero);
  NetemProxy dl_proxy(0, kHost, cloud_server.port(), zero,
                      seeded_profile(cfg.links.downlink, cfg.seed, 3));

  registry.set_cloud_address(addr_of(dl_proxy.port()));
  registry.register_mec({kMecId, addr_of(up_proxy.port()), kCloudTopic});

  const std::string cloud_direct = addr_of(cloud_server.port());
  const auto epoch = std::chrono::steady_clock::now();
  const auto start = epoch + std::chrono::milliseconds(300);

  const std::vector<ProducerConfig> producers = producer_configs(cfg);
  std::vector<SentLog> sent(producers.size());
  std::vector<std::string> producer_errors(producers.size());
  std::string stage_error, consumer_error;
  ReceivedLog received;
  bool got_control = false;

  std::thread stage_thread([&] {
    try {
      stage_component(stage, addr_of(edge_server.port()), addr_of(wan_proxy.port()), epoch);
    } catch (const std::exception& e) {
      stage_error = e.what();
    }
  });
  std::thread consumer_thread([&] {
    try {
      consumer_component(cloud_direct, kMecId, "cits", cfg.poll_interval_ms, cfg.idle_timeout_s,
                         cfg.consumer_start_delay_ms, start, received, got_control);
    } catch (const std::exception& e) {
      consumer_error = e.what();
    }
  });
  std::vector<std::thread> producer_threads;
  producer_threads.reserve(producers.size());
  for (std::size_t i = 0; i < producers.size(); ++i) {
    producer_threads.emplace_back([&, i] {
      try {
        producer_component(producers[i], cloud_direct, start, sent[i]);
      } catch (const std::exception& e) {
        producer_errors[i] = e.what();
      }
    });
  }
  for (auto& t : producer_threads) t.join();

  std::uint64_t total_sent = 0;
  for (const SentLog& log : sent) total_sent += log.entries.size();

  // Let the uplink drain into the broker before injecting the end marker, so
  // the marker cannot overtake shaped traffic still in flight.
  {
    std::uint64_t prev = broker.stats(kDataTopic).published;
    int stable = 0;
    while (true) {
      const std::uint64_t published = broker.stats(kDataTopic).published;
      if (published >= total_sent) break;
      stable = published == prev ? stable + 1 : 0;
      if (stable >= 40) break;  // two quiet seconds: a component died upstream
      prev = published;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }

  {
    CitsMessage control;
    control.producer_id = kControlProducerId;
    control.sequence = 0;
    control.origin_time_ms = system_now_ms();
    control.topic = kDataTopic;
    try {
      BrokerClient ctl(kHost, edge_server.port());
      ctl.publish(kDataTopic, control);
      ctl.close();
    } catch (const std::exception& e) {
      consumer_error = std::string("end marker publish failed: ") + e.what();
    }
  }

  consumer_thread.join();

  broker.shutdown();  // stage gets a shutdown notice, serves out, and exits
  stage_thread.join();

  RepetitionResult r;
  r.per_producer_sent = sent;
  r.merged_sent = merge_sent(sent);
  r.received = received;
  r.received.late_start = cfg.consumer_start_delay_ms > 0;
  if (stage.config().pseudonymize) {
    for (ReceivedRecord& rec : r.received.entries) {
      if (auto orig = stage.pseudonyms().original(rec.key.producer_id)) {
        rec.key.producer_id = *orig;
      }
    }
  }
  r.stage = stage.counters();
  r.broker_data = broker.stats(kDataTopic);
  r.broker_stage = broker.stats(kStageStatsTopic);
  r.cloud = cloud.stats(kCloudTopic);
  for (const auto& [orig, pseud] : stage.pseudonyms().mapping()) {
    r.pseudonyms.emplace_back(pseud, orig);
  }
  std::sort(r.pseudonyms.begin(), r.pseudonyms.end());

  ConservationInput in;
  in.sent = r.merged_sent.entries.size();
  in.control = 1;
  in.broker = r.broker_data;
  in.stage = r.stage;
  in.stage_depth = stage.queue_depth();
  in.cloud_appended = r.cloud.appended;
  in.received = r.received.entries.size();
  in.received_control = got_control ? 1 : 0;
  in.consumer_drained = got_control && !r.received.timed_out;
  r.conservation_ok = check_conservation(in, r.conservation_detail);

  const AnonymizationScheme& scheme = stage.config().scheme;
  if (scheme.cpu_units > 0 || scheme.ram_gb > 0 || !scheme.unlimited_sampling()) {
    r.flags.push_back("emulated-resources");
  }
  if (r.received.timed_out) r.flags.push_back("timeout");
  if (r.received.late_start) r.flags.push_back("late-start");
  for (std::size_t i = 0; i < producer_errors.size(); ++i) {
    if (!producer_errors[i].empty()) {
      r.flags.push_back("component-failure: producer " + std::to_string(i + 1) + ": " +
                        producer_errors[i]);
    }
  }
  if (!stage_error.empty()) r.flags.push_back("component-failure: stage: " + stage_error);
  if (!consumer_error.empty()) r.flags.push_back("component-failure: consumer: " + consumer_error);

  up_proxy.stop();
  wan_proxy.stop();
  dl_proxy.stop();
  edge_server.stop();
  cloud_server.stop();
  return r;
}

}  // namespace edgebench
