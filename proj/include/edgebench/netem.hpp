#pragma once

#include <cstdint>
#include <optional>

#include "edgebench/rng.hpp"

namespace edgebench {

// One-way link shaping parameters. bandwidth_mbps == 0 means uncapped (no
// serialization delay); random_loss_pct is Bernoulli per frame.
struct LinkProfile {
  double base_delay_ms = 0;
  double jitter_ms = 0;  // uniform draw on [0, jitter_ms]
  double bandwidth_mbps = 0;
  double random_loss_pct = 0;
  std::uint64_t seed = 0;
};

double serialization_ms(const LinkProfile& profile, std::size_t frame_bytes);

// Default calibration: 5G segment tuned so an echo probe sees mean RTT
// ~24.5 ms within [15, 34] ms, and the two directions cap at the measured
// UL/DL throughput averages. The MEC-to-cloud WAN is not a measured segment;
// its numbers are conservative placeholders and reports flag them as such.
struct DefaultProfiles {
  LinkProfile uplink_5g;
  LinkProfile wan;
  LinkProfile downlink_5g;
};
DefaultProfiles default_profiles();

// FIFO link: frames leave in send order, each occupying the line for its
// serialization time; propagation delay and jitter ride on top. Offers for a
// given link must come in nondecreasing send-time order.
class LinkState {
public:
  explicit LinkState(LinkProfile profile);

  // Delivery time for a frame handed to the link at send_time_ms, or nullopt
  // when the frame is dropped by random loss (dropped frames do not occupy
  // the line).
  std::optional<double> offer(std::size_t frame_bytes, double send_time_ms);

  const LinkProfile& profile() const { return profile_; }
  std::uint64_t offered_count() const { return offered_; }
  std::uint64_t dropped_count() const { return dropped_; }

private:
  LinkProfile profile_;
  SplitMix64 rng_;
  double busy_until_ms_ = 0;
  double last_delivery_ms_ = 0;
  std::uint64_t offered_ = 0;
  std::uint64_t dropped_ = 0;
};

}  // namespace edgebench
