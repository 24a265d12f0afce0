#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "edgebench/message.hpp"

namespace edgebench {

// Named resource/sampling profile for the MEC data service. The three named
// schemes mirror the platform's sizing tiers; None disables both sampling and
// the resource caps (used for the local platform's pass-through forwarder).
struct AnonymizationScheme {
  std::string name;                        // Small | Medium | Large | None
  int cpu_units = 0;                       // 0 = uncapped processing
  int ram_gb = 0;                          // 0 = unbounded stage queue
  std::optional<double> sampling_rate_hz;  // nullopt = no sampling

  // CPU/RAM quotas cannot be enforced portably in-process; they map to a
  // processing-rate cap and a stage queue bound. Reports label these emulated.
  static constexpr double kPerCpuRateHz = 500.0;
  static constexpr std::size_t kQueuePerRamGb = 250;

  double service_time_ms() const {
    return cpu_units > 0 ? 1000.0 / (cpu_units * kPerCpuRateHz) : 0.0;
  }
  // 0 means unbounded.
  std::size_t queue_capacity() const {
    return ram_gb > 0 ? static_cast<std::size_t>(ram_gb) * kQueuePerRamGb : 0;
  }
  bool unlimited_sampling() const { return !sampling_rate_hz.has_value(); }
};

// Lookup by case-insensitive name; throws std::invalid_argument on unknown names.
AnonymizationScheme scheme_by_name(const std::string& name);

// Predicted packet loss: (1 - S_r / F_data) * 100, clamped below at zero.
// Unlimited sampling predicts zero. input_rate_hz must be positive.
double predicted_packet_loss(std::optional<double> sampling_rate_hz, double input_rate_hz);

enum class SamplerMode { FirstInWindow, LastInWindow };

SamplerMode sampler_mode_by_name(const std::string& name);

// Per-stream downsampling to at most one message per window of width 1/S_r.
// Windows are aligned to each stream's first arrival, so a stream's first
// message is always forwarded and steady 2 Hz traffic through a 0.2 Hz gate
// loses exactly 9 of every 10 messages.
class SampleGate {
public:
  struct Output {
    std::optional<CitsMessage> emit;  // message released by this offer, if any
    std::uint64_t dropped = 0;        // messages discarded by the gate here
  };

  SampleGate(std::optional<double> sampling_rate_hz, SamplerMode mode);

  // FirstInWindow forwards the offered message iff its window is still empty.
  // LastInWindow holds the newest message of the open window and releases the
  // held one once a later window opens (or at flush).
  Output offer(const CitsMessage& msg, double arrival_ms);

  // Release all held last-in-window candidates (end of stream).
  std::vector<CitsMessage> flush();

  bool unlimited() const { return !rate_.has_value(); }
  SamplerMode mode() const { return mode_; }

private:
  struct Stream {
    double window_base_ms = 0;
    std::int64_t window_index = 0;
    bool started = false;
    std::optional<CitsMessage> held;
  };

  std::optional<double> rate_;
  double window_ms_ = 0;
  SamplerMode mode_;
  std::unordered_map<std::uint32_t, Stream> streams_;
};

// Stable, injective producer pseudonyms for one run: keyed 64-bit hash of the
// producer id truncated to 32 bits, with linear probing on collision.
class PseudonymMap {
public:
  explicit PseudonymMap(std::uint64_t salt);

  std::uint32_t pseudonym(std::uint32_t producer_id);
  std::optional<std::uint32_t> original(std::uint32_t pseudonym) const;
  std::uint64_t salt() const { return salt_; }
  std::size_t size() const { return forward_.size(); }
  const std::unordered_map<std::uint32_t, std::uint32_t>& mapping() const { return forward_; }

private:
  std::uint64_t salt_;
  std::unordered_map<std::uint32_t, std::uint32_t> forward_;
  std::unordered_map<std::uint32_t, std::uint32_t> reverse_;
};

// The MEC data service: sampling gate, pseudonymization, and an emulated
// processing-rate cap in front of a bounded work queue. Pure state machine
// over explicit timestamps so the simulated and live runners drive it the
// same way. Control messages bypass the gate and the pseudonym map and are
// never dropped by the queue bound.
class StageCore {
public:
  struct Config {
    AnonymizationScheme scheme;
    SamplerMode sampler_mode = SamplerMode::FirstInWindow;
    bool pseudonymize = true;  // false: local-platform pass-through forwarder
    std::uint64_t salt = 0;
    // Synthetic caps for calibration runs; normally derived from the scheme.
    std::optional<double> service_time_ms_override;
    std::optional<std::size_t> queue_capacity_override;  // 0 = unbounded
  };

  struct Counters {
    std::uint64_t arrived = 0;
    std::uint64_t sampled_out = 0;  // discarded by the sampling gate (by design)
    std::uint64_t queue_drops = 0;  // bounded work queue overflow
    std::uint64_t forwarded = 0;    // completed service, handed downstream
    std::uint64_t retry_drops = 0;  // downstream append failed after retries
  };

  explicit StageCore(Config cfg);

  // Feed one message at its arrival time. Returns the service-completion time
  // of whatever got enqueued by this arrival (in LastInWindow mode that can be
  // an older held message), or nullopt if nothing was enqueued.
  std::optional<double> on_arrival(const CitsMessage& msg, double arrival_ms);

  // Close held last-in-window candidates at end of stream; returns the
  // completion times of everything enqueued.
  std::vector<double> flush(double now_ms);

  bool has_ready(double now_ms) const;
  CitsMessage pop_ready(double now_ms);
  std::optional<double> next_completion() const;
  std::size_t queue_depth() const { return queue_.size(); }

  const Counters& counters() const { return counters_; }
  void count_forwarded() { ++counters_.forwarded; }
  void count_retry_drop() { ++counters_.retry_drops; }
  PseudonymMap& pseudonyms() { return pseudonyms_; }
  const Config& config() const { return cfg_; }

private:
  struct Item {
    CitsMessage msg;
    double completion_ms;
  };

  // nullopt when the bounded queue rejected the message.
  std::optional<double> enqueue(CitsMessage msg, double now_ms);

  Config cfg_;
  SampleGate gate_;
  PseudonymMap pseudonyms_;
  std::deque<Item> queue_;
  double last_completion_ms_ = 0;
  std::size_t queue_cap_;  // 0 = unbounded
  double service_ms_;
  Counters counters_;
};

}  // namespace edgebench
