#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgebench/anonymizer.hpp"
#include "edgebench/edge_broker.hpp"
#include "edgebench/metrics.hpp"
#include "edgebench/netem.hpp"

namespace edgebench {

enum class Platform { Hybrid, Local };

std::string platform_name(Platform platform);
Platform platform_by_name(const std::string& name);  // throws std::invalid_argument

struct LinkSet {
  LinkProfile uplink;
  LinkProfile wan;
  LinkProfile downlink;
};

LinkSet default_link_set();
LinkSet identity_link_set();  // --no-netem: zero delay, unlimited bandwidth

// One benchmark configuration. The eight canonical ones are
// {single, multiple} x {Small, Medium, Large, local-None}.
struct Scenario {
  std::string id;  // "I".."VIII"
  Platform platform = Platform::Hybrid;
  std::string scheme = "Small";
  std::uint32_t producers = 1;

  void validate() const;  // local implies scheme None, producers >= 1
};

const std::vector<Scenario>& canonical_scenarios();
Scenario scenario_by_id(const std::string& id);               // throws on unknown id
std::vector<Scenario> select_scenarios(const std::string& selector);  // id or "all"

// Everything about a run that is not scenario identity. Defaults are the
// desk-scale profile; --paper-scale switches to the full campaign shape.
struct RunOptions {
  double duration_s = 60.0;
  int repetitions = 3;
  bool paper_scale = false;  // 600 s x 10 repetitions
  std::optional<std::uint32_t> producers_override;
  std::optional<std::string> scheme_override;
  std::optional<std::string> platform_override;
  double rate_hz = 2.0;
  std::uint32_t payload_bytes = 1280;
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  bool sim_time = false;
  bool no_netem = false;
  bool distributed = false;
  LinkSet links = default_link_set();
  double poll_interval_ms = 10.0;
  std::size_t broker_capacity = EdgeBrokerCore::kDefaultCapacity;
  SamplerMode sampler = SamplerMode::FirstInWindow;
  MedianPolicy median_policy = MedianPolicy::AverageMiddles;
  SigmaPolicy sigma_policy = SigmaPolicy::Population;
  double idle_timeout_s = 30.0;
  double clock_skew_ms = 0;
  // Path of the binary providing the component subcommands; required by
  // distributed runs, set programmatically (not a config key).
  std::string helper_exe;

  double effective_duration_s() const { return paper_scale ? 600.0 : duration_s; }
  int effective_repetitions() const { return paper_scale ? 10 : repetitions; }
  LinkSet effective_links() const { return no_netem ? identity_link_set() : links; }

  // The scenario with CLI/config overrides applied (overrides may leave the
  // canonical set, e.g. local with a sampling scheme is rejected here).
  Scenario apply_overrides(Scenario s) const;
};

// Structured text config: [run] and [links.uplink|wan|downlink] sections of
// "key = value" lines, mirroring the CLI flags. Unknown sections or keys and
// malformed values are errors carrying "<path>:<line>:".
struct ConfigFile {
  std::optional<std::string> scenario_selector;
  RunOptions options;
};

ConfigFile load_config(const std::string& path);  // throws std::runtime_error

}  // namespace edgebench
