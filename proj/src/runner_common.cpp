#include "edgebench/runner.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edgebench/rng.hpp"

namespace edgebench {

std::vector<ProducerConfig> producer_configs(const RepetitionConfig& cfg) {
  std::vector<ProducerConfig> out;
  out.reserve(cfg.scenario.producers);
  for (std::uint32_t i = 1; i <= cfg.scenario.producers; ++i) {
    ProducerConfig pc;
    pc.producer_id = i;
    pc.rate_hz = cfg.rate_hz;
    pc.payload_bytes = cfg.payload_bytes;
    pc.duration_s = cfg.duration_s;
    pc.seed = mix_seed(cfg.seed, 100 + i);
    pc.clock_skew_ms = cfg.clock_skew_ms;
    pc.topic = kDataTopic;
    pc.validate();
    out.push_back(std::move(pc));
  }
  return out;
}

StageCore::Config stage_config(const RepetitionConfig& cfg) {
  StageCore::Config c;
  c.scheme = scheme_by_name(cfg.scenario.scheme);
  c.sampler_mode = cfg.sampler;
  c.pseudonymize = cfg.scenario.platform == Platform::Hybrid;
  c.salt = mix_seed(cfg.seed, 4);
  return c;
}

std::size_t data_frame_bytes(const std::string& topic, const CitsMessage& msg) {
  // length prefix + command byte + topic string8 + encoded message
  return 4 + 1 + 1 + topic.size() + encoded_size(msg);
}

std::size_t record_frame_bytes(const CitsMessage& msg) {
  // offset + frame length + encoded message, as carried in a fetch response
  return 8 + 4 + encoded_size(msg);
}

std::uint64_t repetition_seed(std::uint64_t run_seed, const std::string& scenario_id, int rep) {
  std::uint64_t sid = 0;
  for (char c : scenario_id) sid = sid * 131 + static_cast<unsigned char>(c);
  return mix_seed(mix_seed(run_seed, sid), static_cast<std::uint64_t>(rep) + 1);
}

LinkProfile seeded_profile(LinkProfile profile, std::uint64_t rep_seed, std::uint64_t index) {
  if (profile.seed == 0) profile.seed = mix_seed(rep_seed, index);
  return profile;
}

void write_pseudonyms_csv(const std::string& path,
                          const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "pseudonym,producer_id\n";
  for (const auto& [pseud, orig] : pairs) out << pseud << ',' << orig << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> load_pseudonyms_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed row in " + path);
    pairs.emplace_back(static_cast<std::uint32_t>(std::stoul(line.substr(0, comma))),
                       static_cast<std::uint32_t>(std::stoul(line.substr(comma + 1))));
  }
  return pairs;
}

namespace {

void explain(std::ostringstream& os, const char* equation, std::uint64_t lhs, std::uint64_t rhs) {
  os << equation << " (" << lhs << " vs " << rhs << ")";
}

}  // namespace

bool check_conservation(const ConservationInput& in, std::string& detail) {
  std::ostringstream os;
  const std::uint64_t injected = in.sent + in.control;
  const std::uint64_t at_broker = in.broker.published + in.uplink_drops;
  if (injected != at_broker) {
    explain(os, "sent + control != broker.published + uplink_drops", injected, at_broker);
  } else if (in.broker.published != in.broker.delivered + in.broker.rejected + in.broker.depth) {
    explain(os, "broker.published != delivered + rejected + depth", in.broker.published,
            in.broker.delivered + in.broker.rejected + in.broker.depth);
  } else if (in.stage.arrived != in.broker.delivered) {
    explain(os, "stage.arrived != broker.delivered", in.stage.arrived, in.broker.delivered);
  } else if (in.stage.arrived != in.stage.sampled_out + in.stage.queue_drops + in.stage.forwarded +
                                     in.stage.retry_drops + in.stage_depth) {
    explain(os, "stage.arrived != sampled_out + queue_drops + forwarded + retry_drops + depth",
            in.stage.arrived,
            in.stage.sampled_out + in.stage.queue_drops + in.stage.forwarded + in.stage.retry_drops +
                in.stage_depth);
  } else if (in.cloud_appended != in.stage.forwarded) {
    explain(os, "cloud.appended != stage.forwarded", in.cloud_appended, in.stage.forwarded);
  } else {
    const std::uint64_t consumed = in.received + in.received_control + in.downlink_drops;
    if (in.consumer_drained && consumed != in.cloud_appended) {
      explain(os, "received + control + downlink_drops != cloud.appended", consumed,
              in.cloud_appended);
    } else if (!in.consumer_drained && consumed > in.cloud_appended) {
      explain(os, "received + control + downlink_drops > cloud.appended", consumed,
              in.cloud_appended);
    } else {
      detail.clear();
      return true;
    }
  }
  detail = os.str();
  return false;
}

}  // namespace edgebench
