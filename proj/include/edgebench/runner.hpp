#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "edgebench/anonymizer.hpp"
#include "edgebench/cloud.hpp"
#include "edgebench/edge_broker.hpp"
#include "edgebench/scenario.hpp"
#include "edgebench/workload.hpp"

namespace edgebench {

inline constexpr const char* kDataTopic = "cits";
inline constexpr const char* kStageStatsTopic = "cits.stage";
inline constexpr const char* kMecId = "mec1";
inline constexpr const char* kCloudTopic = "cloud/mec1/cits";

// One repetition of one scenario, fully resolved (seed already mixed per
// repetition, links carrying their final profiles).
struct RepetitionConfig {
  Scenario scenario;
  double duration_s = 60.0;
  double rate_hz = 2.0;
  std::uint32_t payload_bytes = 1280;
  std::uint64_t seed = 0;
  LinkSet links;
  double poll_interval_ms = 10.0;
  std::size_t broker_capacity = EdgeBrokerCore::kDefaultCapacity;
  SamplerMode sampler = SamplerMode::FirstInWindow;
  double idle_timeout_s = 30.0;
  double clock_skew_ms = 0;
  double consumer_start_delay_ms = 0;  // >0 models a late-attaching consumer
};

struct RepetitionResult {
  std::vector<SentLog> per_producer_sent;  // index i = producer id i+1
  SentLog merged_sent;
  ReceivedLog received;  // producer ids translated back through the pseudonym map
  StageCore::Counters stage;
  TopicStats broker_data;     // edge broker counters for the data topic
  TopicStats broker_stage;    // ".stage" convention counters as reported
  CloudTopicStats cloud;      // cloud log counters for the stream's topic
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pseudonyms;  // (pseudonym, original)
  std::uint64_t uplink_drops = 0;    // random-loss casualties per link (simulated mode)
  std::uint64_t wan_drops = 0;
  std::uint64_t downlink_drops = 0;
  bool conservation_ok = false;
  std::string conservation_detail;  // empty when the check holds
  std::vector<std::string> flags;
};

std::vector<ProducerConfig> producer_configs(const RepetitionConfig& cfg);

// Stage configuration for a repetition: scheme and sampler from the scenario,
// pseudonymization on the hybrid platform only, salt derived from the seed.
StageCore::Config stage_config(const RepetitionConfig& cfg);

// Wire footprint used for link shaping: a PUBLISH/APPEND frame and one record
// inside a FETCH response.
std::size_t data_frame_bytes(const std::string& topic, const CitsMessage& msg);
std::size_t record_frame_bytes(const CitsMessage& msg);

// Per-repetition seed and per-link profile seeding. A nonzero seed already on
// the profile is an explicit override and is kept as-is.
std::uint64_t repetition_seed(std::uint64_t run_seed, const std::string& scenario_id, int rep);
LinkProfile seeded_profile(LinkProfile profile, std::uint64_t rep_seed, std::uint64_t index);

// Deterministic discrete-event run: virtual clock, no sockets, no threads.
RepetitionResult run_repetition_sim(const RepetitionConfig& cfg);

// Real-time run: servers, shaping proxies, and workload threads on loopback.
RepetitionResult run_repetition_live(const RepetitionConfig& cfg);

// Real-time run with every component in its own OS process; `helper_exe` is
// the CLI binary providing the component subcommands, `rep_dir` is where the
// children leave their logs.
RepetitionResult run_repetition_distributed(const RepetitionConfig& cfg,
                                            const std::string& helper_exe,
                                            const std::string& rep_dir);

// Component bodies shared by the in-process runner (threads) and the CLI's
// component subcommands (processes). All of them throw on wire failures and
// leave whatever they logged so far in the out-parameters.
void producer_component(const ProducerConfig& pc, const std::string& cloud_address,
                        std::chrono::steady_clock::time_point start, SentLog& log);
void stage_component(StageCore& stage, const std::string& broker_address,
                     const std::string& cloud_address,
                     std::chrono::steady_clock::time_point epoch);
void consumer_component(const std::string& cloud_address, const std::string& mec_id,
                        const std::string& data_type, double poll_interval_ms,
                        double idle_timeout_s, double start_delay_ms,
                        std::chrono::steady_clock::time_point start, ReceivedLog& log,
                        bool& got_control);

// The pseudonym translation table as a CSV artifact (pseudonym,producer_id),
// written by whoever owns the stage so the runner can join logs afterwards.
void write_pseudonyms_csv(const std::string& path,
                          const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs);
std::vector<std::pair<std::uint32_t, std::uint32_t>> load_pseudonyms_csv(const std::string& path);

// Full accounting ledger for one repetition. Every message a producer logged
// must end the run in exactly one bucket; runners assemble this at teardown.
struct ConservationInput {
  std::uint64_t sent = 0;     // data messages in producer logs
  std::uint64_t control = 0;  // end markers injected by the harness
  std::uint64_t uplink_drops = 0;
  TopicStats broker;  // data topic
  StageCore::Counters stage;
  std::uint64_t stage_depth = 0;
  std::uint64_t cloud_appended = 0;
  std::uint64_t downlink_drops = 0;
  std::uint64_t received = 0;          // data records in the consumer log
  std::uint64_t received_control = 0;  // end markers the consumer saw
  bool consumer_drained = true;        // false when the consumer stopped early
};

// published = delivered + rejected + in-flight, checked stage by stage; on
// failure `detail` names the first equation that does not balance.
bool check_conservation(const ConservationInput& in, std::string& detail);

}  // namespace edgebench
