#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "edgebench/clock.hpp"
#include "edgebench/netem.hpp"
#include "edgebench/rng.hpp"
#include "edgebench/runner.hpp"

namespace edgebench {
namespace {

enum class EvKind : std::uint8_t {
  ProducerSend,
  EdgeArrive,
  StageService,
  CloudArrive,
  ConsumerPoll,
  ConsumerReceive,
};

struct Ev {
  double t = 0;
  std::uint64_t order = 0;  // creation order breaks time ties deterministically
  EvKind kind{};
  CitsMessage msg;                 // EdgeArrive / CloudArrive / ConsumerReceive
  std::size_t producer_index = 0;  // ProducerSend; npos = end-marker injection
  std::size_t k = 0;               // ProducerSend

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

struct EvLater {
  bool operator()(const Ev& a, const Ev& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.order > b.order;
  }
};

TimeMs stamp(double t_ms) { return kSimEpochMs + static_cast<TimeMs>(std::llround(t_ms)); }

// Control frames model a retrying control plane: re-offer through random loss
// so the end marker always gets through (each retry redraws the loss coin).
double offer_control(LinkState& link, std::size_t bytes, double t) {
  for (int i = 0; i < 100000; ++i) {
    if (auto d = link.offer(bytes, t)) return *d;
  }
  throw std::runtime_error("end marker cannot traverse a fully lossy link");
}

struct Sim {
  const RepetitionConfig& cfg;
  std::vector<ProducerConfig> producers;
  EdgeBrokerCore broker;
  EdgeBrokerCore::SubscriberId stage_sub;
  StageCore stage;
  CloudLogCore cloud;
  LinkState up, wan, dl;

  std::priority_queue<Ev, std::vector<Ev>, EvLater> q;
  std::uint64_t next_order = 0;

  std::vector<SentLog> sent;
  ReceivedLog received;
  std::uint64_t fetch_cursor = 0;
  bool got_control = false;
  bool polling = true;
  double last_progress_ms = 0;
  std::uint64_t uplink_drops = 0, wan_drops = 0, downlink_drops = 0;

  explicit Sim(const RepetitionConfig& c)
      : cfg(c),
        producers(producer_configs(c)),
        broker(c.broker_capacity),
        stage_sub(0),
        stage(stage_config(c)),
        up(seeded_profile(c.links.uplink, c.seed, 1)),
        wan(seeded_profile(c.links.wan, c.seed, 2)),
        dl(seeded_profile(c.links.downlink, c.seed, 3)) {
    stage_sub = broker.subscribe(kDataTopic);
    sent.resize(producers.size());
    last_progress_ms = c.consumer_start_delay_ms;
  }

  void push(double t, EvKind kind, CitsMessage msg = {}, std::size_t producer_index = 0,
            std::size_t k = 0) {
    Ev e;
    e.t = t;
    e.order = next_order++;
    e.kind = kind;
    e.msg = std::move(msg);
    e.producer_index = producer_index;
    e.k = k;
    q.push(std::move(e));
  }

  void schedule_initial() {
    double last_send = 0;
    for (std::size_t i = 0; i < producers.size(); ++i) {
      push(send_offset_ms(producers[i], 0), EvKind::ProducerSend, {}, i, 0);
      const std::size_t n = planned_send_count(producers[i]);
      last_send = std::max(last_send, send_offset_ms(producers[i], n - 1));
    }
    // End marker follows the last scheduled send; uplink FIFO keeps it last.
    push(last_send + 1.0, EvKind::ProducerSend, {}, Ev::npos, 0);
    push(cfg.consumer_start_delay_ms, EvKind::ConsumerPoll);
  }

  void on_producer_send(const Ev& ev) {
    if (ev.producer_index == Ev::npos) {
      CitsMessage control;
      control.producer_id = kControlProducerId;
      control.sequence = 0;
      control.origin_time_ms = stamp(ev.t);
      control.topic = kDataTopic;
      const double deliver = offer_control(up, data_frame_bytes(kDataTopic, control), ev.t);
      push(deliver, EvKind::EdgeArrive, std::move(control));
      return;
    }
    const ProducerConfig& pc = producers[ev.producer_index];
    const TimeMs origin = stamp(ev.t + pc.clock_skew_ms);
    CitsMessage msg = make_message(pc, ev.k, origin);
    sent[ev.producer_index].entries.push_back(message_key(msg));
    const std::size_t bytes = data_frame_bytes(kDataTopic, msg);
    if (auto deliver = up.offer(bytes, ev.t)) {
      push(*deliver, EvKind::EdgeArrive, std::move(msg));
    } else {
      ++uplink_drops;
    }
    if (ev.k + 1 < planned_send_count(pc)) {
      push(send_offset_ms(pc, ev.k + 1), EvKind::ProducerSend, {}, ev.producer_index, ev.k + 1);
    }
  }

  void on_edge_arrive(const Ev& ev) {
    if (ev.msg.is_control()) {
      // Close the sampling windows before the end marker enters the stage so
      // held last-in-window candidates stay ahead of it in the queue.
      for (double done : stage.flush(ev.t)) push(done, EvKind::StageService);
    }
    broker.publish(kDataTopic, ev.msg);
    // The stage drains its subscription as fast as it can; in virtual time
    // that is immediately.
    while (auto m = broker.try_next(kDataTopic, stage_sub)) {
      if (auto done = stage.on_arrival(*m, ev.t)) push(*done, EvKind::StageService);
    }
  }

  void on_stage_service(const Ev& ev) {
    while (stage.has_ready(ev.t)) {
      CitsMessage m = stage.pop_ready(ev.t);
      const std::size_t bytes = data_frame_bytes(kCloudTopic, m);
      if (m.is_control()) {
        push(offer_control(wan, bytes, ev.t), EvKind::CloudArrive, std::move(m));
      } else if (auto deliver = wan.offer(bytes, ev.t)) {
        push(*deliver, EvKind::CloudArrive, std::move(m));
      } else {
        ++wan_drops;
        stage.count_retry_drop();
      }
    }
  }

  void on_cloud_arrive(const Ev& ev) {
    if (cloud.append(kCloudTopic, ev.msg).has_value()) {
      stage.count_forwarded();
    } else {
      stage.count_retry_drop();
    }
  }

  void on_consumer_poll(const Ev& ev) {
    if (!polling) return;
    const std::uint64_t end = cloud.end_offset(kCloudTopic);
    bool saw_control = false;
    if (end > fetch_cursor) {
      const auto batch =
          cloud.fetch(kCloudTopic, fetch_cursor, static_cast<std::uint32_t>(end - fetch_cursor));
      for (const LogRecord& rec : batch) {
        ++fetch_cursor;
        const std::size_t bytes = record_frame_bytes(rec.message);
        if (rec.message.is_control()) {
          saw_control = true;
          push(offer_control(dl, bytes, ev.t), EvKind::ConsumerReceive, rec.message);
        } else if (auto deliver = dl.offer(bytes, ev.t)) {
          push(*deliver, EvKind::ConsumerReceive, rec.message);
        } else {
          ++downlink_drops;
        }
      }
      last_progress_ms = ev.t;
    }
    if (saw_control) {
      polling = false;  // the log is append-only and the marker is last
      return;
    }
    if (ev.t - last_progress_ms > cfg.idle_timeout_s * 1000.0) {
      polling = false;
      received.timed_out = true;
      return;
    }
    push(ev.t + cfg.poll_interval_ms, EvKind::ConsumerPoll);
  }

  void on_consumer_receive(const Ev& ev) {
    if (ev.msg.is_control()) {
      got_control = true;
      return;
    }
    MessageKey key = message_key(ev.msg);
    if (stage.config().pseudonymize) {
      if (auto orig = stage.pseudonyms().original(key.producer_id)) key.producer_id = *orig;
    }
    received.entries.push_back({key, stamp(ev.t)});
  }

  void run() {
    schedule_initial();
    while (!q.empty()) {
      Ev ev = q.top();
      q.pop();
      switch (ev.kind) {
        case EvKind::ProducerSend: on_producer_send(ev); break;
        case EvKind::EdgeArrive: on_edge_arrive(ev); break;
        case EvKind::StageService: on_stage_service(ev); break;
        case EvKind::CloudArrive: on_cloud_arrive(ev); break;
        case EvKind::ConsumerPoll: on_consumer_poll(ev); break;
        case EvKind::ConsumerReceive: on_consumer_receive(ev); break;
      }
    }
  }

  RepetitionResult result() {
    RepetitionResult r;
    r.per_producer_sent = sent;
    r.merged_sent = merge_sent(sent);
    r.received = received;
    r.received.late_start = cfg.consumer_start_delay_ms > 0;
    r.stage = stage.counters();
    r.broker_data = broker.stats(kDataTopic);
    r.cloud = cloud.stats(kCloudTopic);
    r.uplink_drops = uplink_drops;
    r.wan_drops = wan_drops;
    r.downlink_drops = downlink_drops;

    broker.report_external_stats(kStageStatsTopic, r.stage.forwarded,
                                 r.stage.sampled_out + r.stage.queue_drops + r.stage.retry_drops,
                                 stage.queue_depth());
    r.broker_stage = broker.stats(kStageStatsTopic);

    for (const auto& [orig, pseud] : stage.pseudonyms().mapping()) {
      r.pseudonyms.emplace_back(pseud, orig);
    }
    std::sort(r.pseudonyms.begin(), r.pseudonyms.end());

    ConservationInput in;
    in.sent = r.merged_sent.entries.size();
    in.control = 1;
    in.uplink_drops = uplink_drops;
    in.broker = r.broker_data;
    in.stage = r.stage;
    in.stage_depth = stage.queue_depth();
    in.cloud_appended = r.cloud.appended;
    in.downlink_drops = downlink_drops;
    in.received = r.received.entries.size();
    in.received_control = got_control ? 1 : 0;
    in.consumer_drained = got_control && !received.timed_out;
    r.conservation_ok = check_conservation(in, r.conservation_detail);

    const auto& scheme = stage.config().scheme;
    if (scheme.cpu_units > 0 || scheme.ram_gb > 0 || !scheme.unlimited_sampling()) {
      r.flags.push_back("emulated-resources");
    }
    if (r.received.timed_out) r.flags.push_back("timeout");
    if (r.received.late_start) r.flags.push_back("late-start");
    return r;
  }
};

}  // namespace

RepetitionResult run_repetition_sim(const RepetitionConfig& cfg) {
  Sim sim(cfg);
  sim.run();
  return sim.result();
}

}  // namespace edgebench
