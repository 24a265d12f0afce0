#include "edgebench/netem.hpp"

#include <algorithm>

namespace edgebench {

double serialization_ms(const LinkProfile& profile, std::size_t frame_bytes) {
  if (profile.bandwidth_mbps <= 0) {
    return 0.0;
  }
  // bits / (Mbit/s) = microseconds; /1000 for ms.
  return static_cast<double>(frame_bytes) * 8.0 / (profile.bandwidth_mbps * 1000.0);
}

DefaultProfiles default_profiles() {
  DefaultProfiles p;
  // One-way base 7.5 ms + U[0, 9.5] jitter per direction puts the echo RTT
  // exactly on the observed [15, 34] ms band with a 24.5 ms mean.
  p.uplink_5g = {7.5, 9.5, 100.0, 0.0, 0};
  p.downlink_5g = {7.5, 9.5, 152.0, 0.0, 0};
  p.wan = {5.0, 1.0, 1000.0, 0.0, 0};
  return p;
}

LinkState::LinkState(LinkProfile profile) : profile_(profile), rng_(profile.seed) {}

std::optional<double> LinkState::offer(std::size_t frame_bytes, double send_time_ms) {
  ++offered_;
  if (profile_.random_loss_pct > 0 &&
      rng_.next_double() * 100.0 < profile_.random_loss_pct) {
    ++dropped_;
    return std::nullopt;
  }
  const double start = std::max(send_time_ms, busy_until_ms_);
  const double ser = serialization_ms(profile_, frame_bytes);
  busy_until_ms_ = start + ser;
  double deliver = busy_until_ms_ + profile_.base_delay_ms;
  if (profile_.jitter_ms > 0) {
    deliver += rng_.next_double() * profile_.jitter_ms;
  }
  // Jitter must not reorder the line: delivery order equals send order.
  deliver = std::max(deliver, last_delivery_ms_);
  last_delivery_ms_ = deliver;
  return deliver;
}

}  // namespace edgebench
