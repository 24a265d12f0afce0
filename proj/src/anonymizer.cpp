#include "edgebench/anonymizer.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "edgebench/rng.hpp"

namespace edgebench {

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

AnonymizationScheme scheme_by_name(const std::string& name) {
  const std::string key = lower(name);
  if (key == "small") return {"Small", 2, 2, 0.2};
  if (key == "medium") return {"Medium", 4, 4, 1.0};
  if (key == "large") return {"Large", 8, 8, std::nullopt};
  if (key == "none") return {"None", 0, 0, std::nullopt};
  throw std::invalid_argument("unknown anonymization scheme: " + name);
}

double predicted_packet_loss(std::optional<double> sampling_rate_hz, double input_rate_hz) {
  if (input_rate_hz <= 0) {
    throw std::invalid_argument("input rate must be positive");
  }
  if (!sampling_rate_hz.has_value()) {
    return 0.0;
  }
  const double loss = (1.0 - *sampling_rate_hz / input_rate_hz) * 100.0;
  return std::max(0.0, loss);
}

SamplerMode sampler_mode_by_name(const std::string& name) {
  const std::string key = lower(name);
  if (key == "first") return SamplerMode::FirstInWindow;
  if (key == "last") return SamplerMode::LastInWindow;
  throw std::invalid_argument("unknown sampler mode: " + name);
}

SampleGate::SampleGate(std::optional<double> sampling_rate_hz, SamplerMode mode)
    : rate_(sampling_rate_hz), mode_(mode) {
  if (rate_.has_value()) {
    if (*rate_ <= 0) {
      throw std::invalid_argument("sampling rate must be positive");
    }
    window_ms_ = 1000.0 / *rate_;
  }
}

SampleGate::Output SampleGate::offer(const CitsMessage& msg, double arrival_ms) {
  Output out;
  if (!rate_.has_value()) {
    out.emit = msg;
    return out;
  }

  Stream& s = streams_[msg.producer_id];
  if (!s.started) {
    s.started = true;
    s.window_base_ms = arrival_ms;
    s.window_index = 0;
    if (mode_ == SamplerMode::FirstInWindow) {
      out.emit = msg;
    } else {
      s.held = msg;
    }
    return out;
  }

  const auto window = static_cast<std::int64_t>(
      std::floor((arrival_ms - s.window_base_ms) / window_ms_));

  if (mode_ == SamplerMode::FirstInWindow) {
    if (window > s.window_index) {
      s.window_index = window;
      out.emit = msg;
    } else {
      out.dropped = 1;
    }
    return out;
  }

  // LastInWindow: entering a later window releases the held candidate.
  if (window > s.window_index) {
    s.window_index = window;
    out.emit = s.held;
    s.held = msg;
  } else {
    if (s.held.has_value()) {
      out.dropped = 1;  // the replaced candidate was not the last of its window
    }
    s.held = msg;
  }
  return out;
}

std::vector<CitsMessage> SampleGate::flush() {
  std::vector<CitsMessage> out;
  if (mode_ != SamplerMode::LastInWindow) {
    return out;
  }
  // Deterministic release order regardless of hash-map layout.
  std::vector<std::uint32_t> ids;
  ids.reserve(streams_.size());
  for (const auto& [id, s] : streams_) {
    if (s.held.has_value()) {
      ids.push_back(id);
    }
  }
  std::sort(ids.begin(), ids.end());
  for (std::uint32_t id : ids) {
    Stream& s = streams_[id];
    out.push_back(std::move(*s.held));
    s.held.reset();
  }
  return out;
}

PseudonymMap::PseudonymMap(std::uint64_t salt) : salt_(salt) {}

std::uint32_t PseudonymMap::pseudonym(std::uint32_t producer_id) {
  auto it = forward_.find(producer_id);
  if (it != forward_.end()) {
    return it->second;
  }
  std::uint64_t h = mix_seed(salt_, producer_id);
  auto candidate = static_cast<std::uint32_t>(h & 0xffffffffu);
  // Probe past collisions and the reserved control id; the 32-bit space is
  // never remotely full, so this terminates quickly.
  while (candidate == kControlProducerId || reverse_.count(candidate) != 0) {
    ++candidate;
  }
  forward_.emplace(producer_id, candidate);
  reverse_.emplace(candidate, producer_id);
  return candidate;
}

std::optional<std::uint32_t> PseudonymMap::original(std::uint32_t pseudonym) const {
  auto it = reverse_.find(pseudonym);
  if (it == reverse_.end()) {
    return std::nullopt;
  }
  return it->second;
}

StageCore::StageCore(Config cfg)
    : cfg_(cfg),
      gate_(cfg.scheme.sampling_rate_hz, cfg.sampler_mode),
      pseudonyms_(cfg.salt),
      queue_cap_(cfg.queue_capacity_override.value_or(cfg.scheme.queue_capacity())),
      service_ms_(cfg.service_time_ms_override.value_or(cfg.scheme.service_time_ms())) {}

std::optional<double> StageCore::on_arrival(const CitsMessage& msg, double arrival_ms) {
  ++counters_.arrived;

  if (msg.is_control()) {
    // Control traffic skips the gate and the map and ignores the queue bound:
    // the end-of-run marker must drain behind everything already queued.
    Item item;
    item.msg = msg;
    last_completion_ms_ = std::max(last_completion_ms_, arrival_ms) + service_ms_;
    item.completion_ms = last_completion_ms_;
    queue_.push_back(std::move(item));
    return queue_.back().completion_ms;
  }

  SampleGate::Output gated = gate_.offer(msg, arrival_ms);
  counters_.sampled_out += gated.dropped;
  if (!gated.emit.has_value()) {
    return std::nullopt;
  }
  return enqueue(std::move(*gated.emit), arrival_ms);
}

std::vector<double> StageCore::flush(double now_ms) {
  std::vector<double> completions;
  for (CitsMessage& msg : gate_.flush()) {
    if (auto c = enqueue(std::move(msg), now_ms)) {
      completions.push_back(*c);
    }
  }
  return completions;
}

std::optional<double> StageCore::enqueue(CitsMessage msg, double now_ms) {
  if (queue_cap_ != 0 && queue_.size() >= queue_cap_) {
    ++counters_.queue_drops;
    return std::nullopt;
  }
  if (cfg_.pseudonymize) {
    msg.producer_id = pseudonyms_.pseudonym(msg.producer_id);
  }
  Item item;
  item.msg = std::move(msg);
  last_completion_ms_ = std::max(last_completion_ms_, now_ms) + service_ms_;
  item.completion_ms = last_completion_ms_;
  queue_.push_back(std::move(item));
  return queue_.back().completion_ms;
}

bool StageCore::has_ready(double now_ms) const {
  return !queue_.empty() && queue_.front().completion_ms <= now_ms + 1e-9;
}

CitsMessage StageCore::pop_ready(double now_ms) {
  assert(has_ready(now_ms));
  (void)now_ms;
  CitsMessage msg = std::move(queue_.front().msg);
  queue_.pop_front();
  return msg;
}

std::optional<double> StageCore::next_completion() const {
  if (queue_.empty()) {
    return std::nullopt;
  }
  return queue_.front().completion_ms;
}

}  // namespace edgebench
