#include "edgebench/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edgebench {

std::string platform_name(Platform platform) {
  return platform == Platform::Hybrid ? "hybrid" : "local";
}

Platform platform_by_name(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "hybrid") return Platform::Hybrid;
  if (lower == "local") return Platform::Local;
  throw std::invalid_argument("unknown platform: " + name);
}

LinkSet default_link_set() {
  const DefaultProfiles defaults = default_profiles();
  return LinkSet{defaults.uplink_5g, defaults.wan, defaults.downlink_5g};
}

LinkSet identity_link_set() { return LinkSet{LinkProfile{}, LinkProfile{}, LinkProfile{}}; }

void Scenario::validate() const {
  if (producers == 0) throw std::invalid_argument("scenario needs at least one producer");
  scheme_by_name(scheme);  // throws on unknown names
  if (platform == Platform::Local && scheme_by_name(scheme).name != "None") {
    throw std::invalid_argument("local platform has no anonymizer; scheme must be None");
  }
}

const std::vector<Scenario>& canonical_scenarios() {
  static const std::vector<Scenario> kScenarios = {
      {"I", Platform::Hybrid, "Small", 1},    {"II", Platform::Hybrid, "Medium", 1},
      {"III", Platform::Hybrid, "Large", 1},  {"IV", Platform::Local, "None", 1},
      {"V", Platform::Hybrid, "Small", 10},   {"VI", Platform::Hybrid, "Medium", 10},
      {"VII", Platform::Hybrid, "Large", 10}, {"VIII", Platform::Local, "None", 10},
  };
  return kScenarios;
}

Scenario scenario_by_id(const std::string& id) {
  for (const Scenario& s : canonical_scenarios()) {
    if (s.id == id) return s;
  }
  throw std::invalid_argument("unknown scenario id: " + id + " (use I..VIII or all)");
}

std::vector<Scenario> select_scenarios(const std::string& selector) {
  if (selector == "all") return canonical_scenarios();
  return {scenario_by_id(selector)};
}

Scenario RunOptions::apply_overrides(Scenario s) const {
  if (platform_override.has_value()) s.platform = platform_by_name(*platform_override);
  if (scheme_override.has_value()) s.scheme = scheme_by_name(*scheme_override).name;
  if (producers_override.has_value()) s.producers = *producers_override;
  s.validate();
  return s;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

[[noreturn]] void fail_at(const std::string& path, int line, const std::string& message) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + message);
}

double parse_double(const std::string& path, int line, const std::string& key,
                    const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail_at(path, line, "expected a number for '" + key + "', got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& path, int line, const std::string& key,
                        const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    fail_at(path, line, "expected an unsigned integer for '" + key + "', got '" + value + "'");
  }
}

bool parse_bool(const std::string& path, int line, const std::string& key,
                const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  fail_at(path, line, "expected true/false for '" + key + "', got '" + value + "'");
}

void apply_link_key(const std::string& path, int line, LinkProfile& link, const std::string& key,
                    const std::string& value) {
  if (key == "base-delay-ms") {
    link.base_delay_ms = parse_double(path, line, key, value);
  } else if (key == "jitter-ms") {
    link.jitter_ms = parse_double(path, line, key, value);
  } else if (key == "bandwidth-mbps") {
    link.bandwidth_mbps = parse_double(path, line, key, value);
  } else if (key == "loss-pct") {
    link.random_loss_pct = parse_double(path, line, key, value);
  } else if (key == "seed") {
    link.seed = parse_u64(path, line, key, value);
  } else {
    fail_at(path, line, "unknown link key '" + key + "'");
  }
}

void apply_run_key(const std::string& path, int line, ConfigFile& cfg, const std::string& key,
                   const std::string& value) {
  RunOptions& opt = cfg.options;
  try {
    if (key == "scenario") {
      select_scenarios(value);  // validate the selector early
      cfg.scenario_selector = value;
    } else if (key == "duration") {
      opt.duration_s = parse_double(path, line, key, value);
    } else if (key == "repetitions") {
      opt.repetitions = static_cast<int>(parse_u64(path, line, key, value));
    } else if (key == "producers") {
      opt.producers_override = static_cast<std::uint32_t>(parse_u64(path, line, key, value));
    } else if (key == "rate") {
      opt.rate_hz = parse_double(path, line, key, value);
    } else if (key == "payload") {
      opt.payload_bytes = static_cast<std::uint32_t>(parse_u64(path, line, key, value));
    } else if (key == "scheme") {
      opt.scheme_override = scheme_by_name(value).name;
    } else if (key == "platform") {
      platform_by_name(value);
      opt.platform_override = value;
    } else if (key == "seed") {
      opt.seed = parse_u64(path, line, key, value);
    } else if (key == "out") {
      opt.out_dir = value;
    } else if (key == "sim-time") {
      opt.sim_time = parse_bool(path, line, key, value);
    } else if (key == "paper-scale") {
      opt.paper_scale = parse_bool(path, line, key, value);
    } else if (key == "no-netem") {
      opt.no_netem = parse_bool(path, line, key, value);
    } else if (key == "distributed") {
      opt.distributed = parse_bool(path, line, key, value);
    } else if (key == "poll-interval-ms") {
      opt.poll_interval_ms = parse_double(path, line, key, value);
    } else if (key == "broker-capacity") {
      opt.broker_capacity = parse_u64(path, line, key, value);
    } else if (key == "sampler") {
      opt.sampler = sampler_mode_by_name(value);
    } else if (key == "median") {
      opt.median_policy = median_policy_by_name(value);
    } else if (key == "sigma") {
      opt.sigma_policy = sigma_policy_by_name(value);
    } else if (key == "idle-timeout") {
      opt.idle_timeout_s = parse_double(path, line, key, value);
    } else if (key == "clock-skew-ms") {
      opt.clock_skew_ms = parse_double(path, line, key, value);
    } else {
      fail_at(path, line, "unknown key '" + key + "' in [run]");
    }
  } catch (const std::invalid_argument& e) {
    fail_at(path, line, e.what());
  }
}

}  // namespace

ConfigFile load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config file");

  ConfigFile cfg;
  std::string section = "run";
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string stripped = trim(raw.substr(0, raw.find('#')));
    if (stripped.empty()) continue;

    if (stripped.front() == '[') {
      if (stripped.back() != ']') fail_at(path, line, "unterminated section header");
      section = trim(stripped.substr(1, stripped.size() - 2));
      if (section != "run" && section != "links.uplink" && section != "links.wan" &&
          section != "links.downlink") {
        fail_at(path, line, "unknown section [" + section + "]");
      }
      continue;
    }

    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) fail_at(path, line, "expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) fail_at(path, line, "empty key");
    if (value.empty()) fail_at(path, line, "empty value for '" + key + "'");

    if (section == "run") {
      apply_run_key(path, line, cfg, key, value);
    } else if (section == "links.uplink") {
      apply_link_key(path, line, cfg.options.links.uplink, key, value);
    } else if (section == "links.wan") {
      apply_link_key(path, line, cfg.options.links.wan, key, value);
    } else {
      apply_link_key(path, line, cfg.options.links.downlink, key, value);
    }
  }
  return cfg;
}

}  // namespace edgebench
