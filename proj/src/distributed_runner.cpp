#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "edgebench/clients.hpp"
#include "edgebench/netem_proxy.hpp"
#include "edgebench/runner.hpp"

extern char** environ;

namespace fs = std::filesystem;

namespace edgebench {
namespace {

constexpr const char* kHost = "127.0.0.1";

std::string addr_of(std::uint16_t port) {
  return std::string(kHost) + ":" + std::to_string(port);
}

struct Child {
  pid_t pid = -1;
  int out_fd = -1;  // read end of the child's stdout, -1 when inherited

  bool running() const { return pid > 0; }
};

// Spawns helper_exe with args; when capture_stdout, the child's stdout is
// returned through Child::out_fd for the port handshake.
Child spawn_child(const std::string& exe, const std::vector<std::string>& args,
                  bool capture_stdout) {
  int pipe_fds[2] = {-1, -1};
  if (capture_stdout && pipe(pipe_fds) != 0) {
    throw std::runtime_error("pipe failed: " + std::string(std::strerror(errno)));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  if (capture_stdout) {
    posix_spawn_file_actions_adddup2(&actions, pipe_fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, pipe_fds[0]);
    posix_spawn_file_actions_addclose(&actions, pipe_fds[1]);
  }

  std::vector<std::string> argv_store;
  argv_store.push_back(exe);
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  argv.reserve(argv_store.size() + 1);
  for (std::string& a : argv_store) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = -1;
  const int rc = posix_spawn(&pid, exe.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (capture_stdout) ::close(pipe_fds[1]);
  if (rc != 0) {
    if (capture_stdout) ::close(pipe_fds[0]);
    throw std::runtime_error("cannot spawn " + exe + ": " + std::strerror(rc));
  }

  Child child;
  child.pid = pid;
  child.out_fd = capture_stdout ? pipe_fds[0] : -1;
  return child;
}

// First stdout line of a freshly spawned server child: "PORT <n>".
std::uint16_t read_port_line(Child& child, int timeout_ms) {
  std::string line;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  while (true) {
    pollfd pfd{child.out_fd, POLLIN, 0};
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                          deadline - std::chrono::steady_clock::now())
                          .count();
    if (left <= 0) throw std::runtime_error("timed out waiting for a server child's port");
    const int pr = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 1000)));
    if (pr < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("poll failed: " + std::string(std::strerror(errno)));
    }
    if (pr == 0) continue;
    char c = 0;
    const ssize_t n = ::read(child.out_fd, &c, 1);
    if (n == 0) throw std::runtime_error("server child exited before announcing its port");
    if (n < 0) {
      if (errno == EINTR) continue;
      throw std::runtime_error("read failed: " + std::string(std::strerror(errno)));
    }
    if (c == '\n') break;
    line.push_back(c);
    if (line.size() > 64) throw std::runtime_error("malformed port announcement");
  }
  if (line.rfind("PORT ", 0) != 0) throw std::runtime_error("malformed port announcement: " + line);
  const unsigned long port = std::stoul(line.substr(5));
  if (port == 0 || port > 65535) throw std::runtime_error("implausible port: " + line);
  return static_cast<std::uint16_t>(port);
}

int wait_child(Child& child) {
  if (!child.running()) return -1;
  int status = 0;
  while (waitpid(child.pid, &status, 0) < 0) {
    if (errno != EINTR) return -1;
  }
  if (child.out_fd >= 0) {
    ::close(child.out_fd);
    child.out_fd = -1;
  }
  child.pid = -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
}

void kill_child(Child& child) {
  if (!child.running()) return;
  ::kill(child.pid, SIGKILL);
  wait_child(child);
}

std::string dstr(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RepetitionResult run_repetition_distributed(const RepetitionConfig& cfg,
                                            const std::string& helper_exe,
                                            const std::string& rep_dir) {
  fs::create_directories(rep_dir);
  const std::vector<ProducerConfig> producers = producer_configs(cfg);
  const StageCore::Config stage_cfg = stage_config(cfg);

  std::vector<Child> children;
  const auto cleanup = [&] {
    for (Child& c : children) kill_child(c);
  };

  try {
    Child edge = spawn_child(
        helper_exe,
        {"edge-broker", "--port", "0", "--capacity", std::to_string(cfg.broker_capacity)}, true);
    children.push_back(edge);
    const std::uint16_t edge_port = read_port_line(children[0], 10000);

    Child cloud = spawn_child(helper_exe, {"cloud-broker", "--port", "0"}, true);
    children.push_back(cloud);
    const std::uint16_t cloud_port = read_port_line(children[1], 10000);

    const LinkProfile zero{};
    NetemProxy up_proxy(0, kHost, edge_port, seeded_profile(cfg.links.uplink, cfg.seed, 1), zero);
    NetemProxy wan_proxy(0, kHost, cloud_port, seeded_profile(cfg.links.wan, cfg.seed, 2), zero);
    NetemProxy dl_proxy(0, kHost, cloud_port, zero, seeded_profile(cfg.links.downlink, cfg.seed, 3));

    {
      CloudClient directory(kHost, cloud_port);
      directory.set_cloud_address(addr_of(dl_proxy.port()));
      if (!directory.register_mec({kMecId, addr_of(up_proxy.port()), kCloudTopic})) {
        throw std::runtime_error("mec registration rejected");
      }
      directory.close();
    }

    const std::string cloud_direct = addr_of(cloud_port);
    const auto start_at_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::system_clock::now().time_since_epoch())
                                 .count() +
                             1500;
    const std::string start_arg = std::to_string(start_at_ms);

    children.push_back(spawn_child(
        helper_exe,
        {"stage", "--broker", addr_of(edge_port), "--cloud", addr_of(wan_proxy.port()),
         "--scheme", stage_cfg.scheme.name, "--sampler",
         stage_cfg.sampler_mode == SamplerMode::FirstInWindow ? "first" : "last", "--pseudonymize",
         stage_cfg.pseudonymize ? "1" : "0", "--salt", std::to_string(stage_cfg.salt), "--out",
         rep_dir},
        false));
    const std::size_t stage_index = children.size() - 1;

    children.push_back(spawn_child(
        helper_exe,
        {"consumer", "--cloud", cloud_direct, "--mec", kMecId, "--type", "cits", "--poll-ms",
         dstr(cfg.poll_interval_ms), "--idle-timeout", dstr(cfg.idle_timeout_s), "--delay-ms",
         dstr(cfg.consumer_start_delay_ms), "--start-at-ms", start_arg, "--out", rep_dir},
        false));
    const std::size_t consumer_index = children.size() - 1;

    std::vector<std::size_t> producer_indices;
    for (const ProducerConfig& pc : producers) {
      children.push_back(spawn_child(
          helper_exe,
          {"producer", "--cloud", cloud_direct, "--id", std::to_string(pc.producer_id), "--rate",
           dstr(pc.rate_hz), "--payload", std::to_string(pc.payload_bytes), "--duration",
           dstr(pc.duration_s), "--seed", std::to_string(pc.seed), "--skew-ms",
           dstr(pc.clock_skew_ms), "--start-at-ms", start_arg, "--out", rep_dir},
          false));
      producer_indices.push_back(children.size() - 1);
    }

    std::vector<std::string> failures;
    for (std::size_t idx : producer_indices) {
      if (wait_child(children[idx]) != 0) {
        failures.push_back("component-failure: producer " +
                           std::to_string(idx - producer_indices.front() + 1) + ": exit nonzero");
      }
    }

    std::vector<SentLog> sent;
    std::uint64_t total_sent = 0;
    for (const ProducerConfig& pc : producers) {
      const fs::path path = fs::path(rep_dir) / ("sent_" + std::to_string(pc.producer_id) + ".csv");
      SentLog log;
      if (fs::exists(path)) log = load_sent_csv(path.string());
      total_sent += log.entries.size();
      sent.push_back(std::move(log));
    }

    BrokerClient ctl(kHost, edge_port);
    {
      std::uint64_t prev = 0;
      int stable = 0;
      while (true) {
        const BrokerWireStats s = ctl.stats(kDataTopic);
        const std::uint64_t published = s.accepted + s.dropped;
        if (published >= total_sent) break;
        stable = published == prev ? stable + 1 : 0;
        if (stable >= 40) break;
        prev = published;
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
    }
    {
      CitsMessage control;
      control.producer_id = kControlProducerId;
      control.sequence = 0;
      control.origin_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                   std::chrono::system_clock::now().time_since_epoch())
                                   .count();
      control.topic = kDataTopic;
      ctl.publish(kDataTopic, control);
    }

    const int consumer_exit = wait_child(children[consumer_index]);
    if (consumer_exit != 0) failures.push_back("component-failure: consumer: exit nonzero");

    // Final broker counters, while it is still up. The single subscriber has
    // drained by now, so delivered = accepted − depth.
    const BrokerWireStats data_stats = ctl.stats(kDataTopic);
    const BrokerWireStats stage_stats = ctl.stats(kStageStatsTopic);
    ctl.request_shutdown();
    ctl.close();

    const int stage_exit = wait_child(children[stage_index]);
    if (stage_exit != 0) failures.push_back("component-failure: stage: exit nonzero");
    if (wait_child(children[0]) != 0) {
      failures.push_back("component-failure: edge broker: exit nonzero");
    }

    CloudTopicStats cloud_stats;
    {
      CloudClient cc(kHost, cloud_port);
      cloud_stats = cc.stats(kCloudTopic);
      cc.request_shutdown();
      cc.close();
    }
    if (wait_child(children[1]) != 0) {
      failures.push_back("component-failure: cloud broker: exit nonzero");
    }

    up_proxy.stop();
    wan_proxy.stop();
    dl_proxy.stop();

    RepetitionResult r;
    r.per_producer_sent = sent;
    r.merged_sent = merge_sent(sent);

    const fs::path received_path = fs::path(rep_dir) / "received_consumer1.csv";
    if (fs::exists(received_path)) r.received = load_received_csv(received_path.string());
    r.received.late_start = cfg.consumer_start_delay_ms > 0;

    const fs::path pseud_path = fs::path(rep_dir) / "pseudonyms_stage.csv";
    if (fs::exists(pseud_path)) r.pseudonyms = load_pseudonyms_csv(pseud_path.string());
    if (!r.pseudonyms.empty()) {
      std::unordered_map<std::uint32_t, std::uint32_t> reverse;
      for (const auto& [pseud, orig] : r.pseudonyms) reverse[pseud] = orig;
      for (ReceivedRecord& rec : r.received.entries) {
        const auto it = reverse.find(rec.key.producer_id);
        if (it != reverse.end()) rec.key.producer_id = it->second;
      }
    }

    const fs::path stage_stats_path = fs::path(rep_dir) / "stage_stats.json";
    std::uint64_t stage_depth = 0;
    if (fs::exists(stage_stats_path)) {
      std::ifstream in(stage_stats_path);
      const nlohmann::json doc = nlohmann::json::parse(in);
      r.stage.arrived = doc.at("arrived").get<std::uint64_t>();
      r.stage.sampled_out = doc.at("sampled_out").get<std::uint64_t>();
      r.stage.queue_drops = doc.at("queue_drops").get<std::uint64_t>();
      r.stage.forwarded = doc.at("forwarded").get<std::uint64_t>();
      r.stage.retry_drops = doc.at("retry_drops").get<std::uint64_t>();
      stage_depth = doc.at("depth").get<std::uint64_t>();
    } else {
      failures.push_back("component-failure: stage: no stats file");
    }

    r.broker_data.accepted = data_stats.accepted;
    r.broker_data.rejected = data_stats.dropped;
    r.broker_data.depth = data_stats.depth;
    r.broker_data.published = data_stats.accepted + data_stats.dropped;
    r.broker_data.delivered = data_stats.accepted - data_stats.depth;
    r.broker_stage.accepted = stage_stats.accepted;
    r.broker_stage.rejected = stage_stats.dropped;
    r.broker_stage.depth = stage_stats.depth;
    r.cloud = cloud_stats;

    ConservationInput in;
    in.sent = r.merged_sent.entries.size();
    in.control = 1;
    in.broker = r.broker_data;
    in.stage = r.stage;
    in.stage_depth = stage_depth;
    in.cloud_appended = r.cloud.appended;
    in.received = r.received.entries.size();
    in.received_control = (consumer_exit == 0 && !r.received.timed_out) ? 1 : 0;
    in.consumer_drained = consumer_exit == 0 && !r.received.timed_out;
    r.conservation_ok = check_conservation(in, r.conservation_detail);

    const AnonymizationScheme& scheme = stage_cfg.scheme;
    if (scheme.cpu_units > 0 || scheme.ram_gb > 0 || !scheme.unlimited_sampling()) {
      r.flags.push_back("emulated-resources");
    }
    if (r.received.timed_out) r.flags.push_back("timeout");
    if (r.received.late_start) r.flags.push_back("late-start");
    r.flags.insert(r.flags.end(), failures.begin(), failures.end());
    return r;
  } catch (...) {
    cleanup();
    throw;
  }
}

}  // namespace edgebench
