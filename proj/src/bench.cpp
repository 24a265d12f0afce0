#include "edgebench/bench.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace fs = std::filesystem;

namespace edgebench {
namespace {

bool same_shape(const LinkProfile& a, const LinkProfile& b) {
  return a.base_delay_ms == b.base_delay_ms && a.jitter_ms == b.jitter_ms &&
         a.bandwidth_mbps == b.bandwidth_mbps;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

RepetitionConfig make_repetition_config(const Scenario& s, const RunOptions& opt, int rep) {
  RepetitionConfig rc;
  rc.scenario = s;
  rc.duration_s = opt.effective_duration_s();
  rc.rate_hz = opt.rate_hz;
  rc.payload_bytes = opt.payload_bytes;
  rc.seed = repetition_seed(opt.seed, s.id, rep);
  rc.links = opt.effective_links();
  rc.poll_interval_ms = opt.poll_interval_ms;
  rc.broker_capacity = opt.broker_capacity;
  rc.sampler = opt.sampler;
  rc.idle_timeout_s = opt.idle_timeout_s;
  rc.clock_skew_ms = opt.clock_skew_ms;
  return rc;
}

BenchmarkReport build_report(const Scenario& s, const RunOptions& opt, int repetition,
                             const RepetitionResult& result) {
  BenchmarkReport r;
  r.scenario_id = s.id;
  r.platform = platform_name(s.platform);
  r.scheme = s.scheme;
  r.producers = s.producers;
  r.repetition = repetition;

  const PacketLossResult loss = compute_packet_loss(result.merged_sent, result.received);
  const std::vector<LatencySample> samples = compute_latencies(result.received);
  bool negative = false;
  for (const LatencySample& sample : samples) negative = negative || sample.latency_ms < 0;
  if (!samples.empty()) r.latency = summarize(samples, opt.median_policy, opt.sigma_policy);

  r.measured_loss_pct = loss.loss_pct;
  r.verdict =
      compare_to_prediction(loss.loss_pct, scheme_by_name(s.scheme), opt.rate_hz, s.producers > 1);
  r.predicted_loss_pct = r.verdict.predicted_pct;
  r.sent_count = loss.sent_count;
  r.received_count = loss.matched_count;
  r.duplicate_count = loss.duplicate_count;
  r.anomaly_count = loss.anomalies.size();
  r.stage_drop_count =
      result.stage.sampled_out + result.stage.queue_drops + result.stage.retry_drops;
  r.sampled_out_count = result.stage.sampled_out;
  r.broker_reject_count = result.broker_data.rejected;

  r.flags = result.flags;
  if (samples.empty()) r.flags.push_back("no-samples");
  if (negative) r.flags.push_back("negative-latency");
  // The WAN segment is a synthetic calibration, unlike the measured 5G legs.
  if (!opt.no_netem && same_shape(opt.links.wan, default_link_set().wan)) {
    r.flags.push_back("synthetic-wan-profile");
  }
  if (!result.conservation_ok) r.flags.push_back("conservation: " + result.conservation_detail);
  return r;
}

ScenarioOutcome run_scenario(const Scenario& scenario, const RunOptions& opt) {
  const int reps = opt.effective_repetitions();
  if (reps < 1) throw std::invalid_argument("repetitions must be >= 1");

  ScenarioOutcome out;
  out.scenario = opt.apply_overrides(scenario);
  const Scenario& s = out.scenario;
  const fs::path out_dir(opt.out_dir);
  const fs::path scen_dir = out_dir / ("scenario_" + s.id);
  fs::create_directories(scen_dir);

  for (int rep = 0; rep < reps; ++rep) {
    const RepetitionConfig rc = make_repetition_config(s, opt, rep);
    const fs::path rep_dir = scen_dir / ("rep" + std::to_string(rep + 1));
    fs::create_directories(rep_dir);

    RepetitionResult result;
    if (opt.sim_time) {
      result = run_repetition_sim(rc);
    } else if (opt.distributed) {
      if (opt.helper_exe.empty()) {
        throw std::runtime_error("distributed mode requires the component binary path");
      }
      result = run_repetition_distributed(rc, opt.helper_exe, rep_dir.string());
    } else {
      result = run_repetition_live(rc);
    }

    for (std::size_t i = 0; i < result.per_producer_sent.size(); ++i) {
      write_sent_csv((rep_dir / ("sent_" + std::to_string(i + 1) + ".csv")).string(),
                     result.per_producer_sent[i]);
    }
    write_received_csv((rep_dir / "received_consumer1.csv").string(), result.received);
    if (!result.pseudonyms.empty()) {
      write_pseudonyms_csv((rep_dir / "pseudonyms_stage.csv").string(), result.pseudonyms);
    }

    out.repetitions.push_back(build_report(s, opt, rep + 1, result));
    if (!result.conservation_ok) out.conservation_ok = false;
    for (const std::string& flag : out.repetitions.back().flags) {
      if (flag.rfind("component-failure", 0) == 0) out.component_failure = true;
    }
    if (out.component_failure) break;  // keep the partial logs, skip the rest
  }

  out.aggregate = aggregate_reports(out.repetitions);

  nlohmann::json doc;
  doc["aggregate"] = nlohmann::json::parse(report_to_json(out.aggregate));
  nlohmann::json reps_json = nlohmann::json::array();
  for (const BenchmarkReport& r : out.repetitions) {
    reps_json.push_back(nlohmann::json::parse(report_to_json(r)));
  }
  doc["repetitions"] = std::move(reps_json);
  write_text(out_dir / ("report_" + s.id + ".json"), doc.dump(2) + "\n");
  return out;
}

SuiteOutcome run_suite(const std::vector<Scenario>& scenarios, const RunOptions& opt) {
  SuiteOutcome suite;
  std::vector<BenchmarkReport> rows;
  for (const Scenario& s : scenarios) {
    suite.scenarios.push_back(run_scenario(s, opt));
    rows.push_back(suite.scenarios.back().aggregate);
  }
  suite.all_pass = !suite.scenarios.empty();
  std::string verdicts;
  for (const ScenarioOutcome& sc : suite.scenarios) {
    const bool ok = sc.aggregate.verdict.pass && sc.conservation_ok && !sc.component_failure;
    suite.all_pass = suite.all_pass && ok;
    verdicts += "scenario " + sc.scenario.id + ": " + (ok ? "PASS" : "FAIL");
    if (!sc.conservation_ok) verdicts += " (accounting imbalance)";
    if (sc.component_failure) verdicts += " (component failure)";
    verdicts += "\n";
  }
  suite.table = render_table(rows) + "\n" + verdicts;
  write_text(fs::path(opt.out_dir) / "summary.txt", suite.table);
  return suite;
}

}  // namespace edgebench
