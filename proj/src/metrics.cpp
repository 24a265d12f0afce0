#include "edgebench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace edgebench {

std::vector<LatencySample> compute_latencies(const ReceivedLog& received) {
  std::vector<LatencySample> samples;
  samples.reserve(received.entries.size());
  for (const ReceivedRecord& rec : received.entries) {
    samples.push_back(
        {rec.key, static_cast<double>(rec.receive_time_ms - rec.key.origin_time_ms)});
  }
  return samples;
}

PacketLossResult compute_packet_loss(const SentLog& sent, const ReceivedLog& received) {
  if (sent.entries.empty()) {
    throw std::invalid_argument("packet loss undefined for an empty sent log");
  }
  std::unordered_set<MessageKey, MessageKeyHash> sent_keys(sent.entries.begin(),
                                                           sent.entries.end());
  PacketLossResult result;
  result.sent_count = sent_keys.size();

  std::unordered_set<MessageKey, MessageKeyHash> seen;
  for (const ReceivedRecord& rec : received.entries) {
    if (!seen.insert(rec.key).second) {
      ++result.duplicate_count;
      continue;
    }
    if (sent_keys.count(rec.key) != 0) {
      ++result.matched_count;
    } else {
      result.anomalies.push_back(rec.key);
    }
  }
  result.loss_pct = (1.0 - static_cast<double>(result.matched_count) /
                               static_cast<double>(result.sent_count)) *
                    100.0;
  return result;
}

MedianPolicy median_policy_by_name(const std::string& name) {
  if (name == "average") return MedianPolicy::AverageMiddles;
  if (name == "lower") return MedianPolicy::LowerMiddle;
  throw std::invalid_argument("unknown median policy: " + name);
}

SigmaPolicy sigma_policy_by_name(const std::string& name) {
  if (name == "population") return SigmaPolicy::Population;
  if (name == "sample") return SigmaPolicy::Sample;
  throw std::invalid_argument("unknown sigma policy: " + name);
}

Summary summarize(const std::vector<LatencySample>& samples, MedianPolicy median_policy,
                  SigmaPolicy sigma_policy) {
  if (samples.empty()) {
    throw std::invalid_argument("no latency samples to summarize");
  }
  Summary s;
  s.count = samples.size();

  std::vector<double> sorted;
  sorted.reserve(s.count);
  for (const LatencySample& x : samples) {
    sorted.push_back(x.latency_ms);
  }
  // Accumulate in sorted order so the summary is bit-identical under any
  // permutation of the input.
  std::sort(sorted.begin(), sorted.end());

  double sum = 0;
  for (double v : sorted) {
    sum += v;
  }
  s.mean_ms = sum / static_cast<double>(s.count);
  if (s.count % 2 == 1) {
    s.median_ms = sorted[s.count / 2];
  } else if (median_policy == MedianPolicy::AverageMiddles) {
    s.median_ms = (sorted[s.count / 2 - 1] + sorted[s.count / 2]) / 2.0;
  } else {
    s.median_ms = sorted[s.count / 2 - 1];
  }

  double sq = 0;
  for (double v : sorted) {
    const double d = v - s.mean_ms;
    sq += d * d;
  }
  if (sigma_policy == SigmaPolicy::Population) {
    s.sigma_ms = std::sqrt(sq / static_cast<double>(s.count));
  } else {
    s.sigma_ms = s.count > 1 ? std::sqrt(sq / static_cast<double>(s.count - 1)) : 0.0;
  }
  return s;
}

PredictionVerdict compare_to_prediction(double measured_loss_pct,
                                        const AnonymizationScheme& scheme,
                                        double input_rate_hz, bool multiple_producers) {
  PredictionVerdict v;
  v.measured_pct = measured_loss_pct;
  v.predicted_pct = predicted_packet_loss(scheme.sampling_rate_hz, input_rate_hz);
  v.delta = v.measured_pct - v.predicted_pct;
  v.tolerance = multiple_producers ? kMultiProducerTolerancePts : kSingleProducerTolerancePts;
  v.pass = std::fabs(v.delta) <= v.tolerance;
  return v;
}

BenchmarkReport aggregate_reports(const std::vector<BenchmarkReport>& reps) {
  if (reps.empty()) {
    throw std::invalid_argument("no repetition reports to aggregate");
  }
  BenchmarkReport agg = reps.front();
  agg.repetition = -1;
  agg.flags.clear();

  double mean_sum = 0;
  std::vector<double> medians;
  std::uint64_t total_count = 0;
  agg.sent_count = agg.received_count = agg.duplicate_count = agg.anomaly_count = 0;
  agg.stage_drop_count = agg.sampled_out_count = agg.broker_reject_count = 0;

  for (const BenchmarkReport& r : reps) {
    mean_sum += r.latency.mean_ms;
    medians.push_back(r.latency.median_ms);
    total_count += r.latency.count;
    agg.sent_count += r.sent_count;
    agg.received_count += r.received_count;
    agg.duplicate_count += r.duplicate_count;
    agg.anomaly_count += r.anomaly_count;
    agg.stage_drop_count += r.stage_drop_count;
    agg.sampled_out_count += r.sampled_out_count;
    agg.broker_reject_count += r.broker_reject_count;
    for (const std::string& f : r.flags) {
      if (std::find(agg.flags.begin(), agg.flags.end(), f) == agg.flags.end()) {
        agg.flags.push_back(f);
      }
    }
  }
  agg.latency.mean_ms = mean_sum / static_cast<double>(reps.size());

  std::sort(medians.begin(), medians.end());
  const std::size_t n = medians.size();
  agg.latency.median_ms =
      n % 2 == 1 ? medians[n / 2] : (medians[n / 2 - 1] + medians[n / 2]) / 2.0;

  // Pooled sigma around the pooled mean: per-rep second moments recombined, so
  // it equals the population sigma of all samples concatenated.
  agg.latency.count = total_count;
  if (total_count > 0) {
    double weighted_mean = 0;
    for (const BenchmarkReport& r : reps) {
      weighted_mean += r.latency.mean_ms * static_cast<double>(r.latency.count);
    }
    weighted_mean /= static_cast<double>(total_count);
    double sq = 0;
    for (const BenchmarkReport& r : reps) {
      const double nc = static_cast<double>(r.latency.count);
      const double dm = r.latency.mean_ms - weighted_mean;
      sq += nc * (r.latency.sigma_ms * r.latency.sigma_ms + dm * dm);
    }
    agg.latency.sigma_ms = std::sqrt(sq / static_cast<double>(total_count));
  } else {
    agg.latency.sigma_ms = 0;
  }

  agg.measured_loss_pct =
      agg.sent_count > 0 ? (1.0 - static_cast<double>(agg.received_count) /
                                      static_cast<double>(agg.sent_count)) *
                               100.0
                         : 0.0;
  agg.verdict.measured_pct = agg.measured_loss_pct;
  agg.verdict.predicted_pct = agg.predicted_loss_pct;
  agg.verdict.delta = agg.measured_loss_pct - agg.predicted_loss_pct;
  agg.verdict.tolerance = reps.front().verdict.tolerance;
  agg.verdict.pass = std::fabs(agg.verdict.delta) <= agg.verdict.tolerance;
  return agg;
}

namespace {

nlohmann::json summary_to_json(const Summary& s) {
  return {{"mean_ms", s.mean_ms},
          {"median_ms", s.median_ms},
          {"sigma_ms", s.sigma_ms},
          {"count", s.count}};
}

nlohmann::json verdict_to_json(const PredictionVerdict& v) {
  return {{"pass", v.pass},
          {"measured_pct", v.measured_pct},
          {"predicted_pct", v.predicted_pct},
          {"delta", v.delta},
          {"tolerance", v.tolerance}};
}

}  // namespace

std::string report_to_json(const BenchmarkReport& r) {
  nlohmann::json j;
  j["scenario_id"] = r.scenario_id;
  j["platform"] = r.platform;
  j["scheme"] = r.scheme;
  j["producers"] = r.producers;
  j["repetition"] = r.repetition;
  j["latency"] = summary_to_json(r.latency);
  j["measured_loss_pct"] = r.measured_loss_pct;
  j["predicted_loss_pct"] = r.predicted_loss_pct;
  j["sent_count"] = r.sent_count;
  j["received_count"] = r.received_count;
  j["duplicate_count"] = r.duplicate_count;
  j["anomaly_count"] = r.anomaly_count;
  j["stage_drop_count"] = r.stage_drop_count;
  j["sampled_out_count"] = r.sampled_out_count;
  j["broker_reject_count"] = r.broker_reject_count;
  j["verdict"] = verdict_to_json(r.verdict);
  j["flags"] = r.flags;
  j["emulated_resources"] = true;  // CPU/RAM caps are rate/queue stand-ins
  return j.dump(2) + "\n";
}

BenchmarkReport report_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  BenchmarkReport r;
  r.scenario_id = j.at("scenario_id").get<std::string>();
  r.platform = j.at("platform").get<std::string>();
  r.scheme = j.at("scheme").get<std::string>();
  r.producers = j.at("producers").get<std::uint32_t>();
  r.repetition = j.at("repetition").get<int>();
  r.latency.mean_ms = j.at("latency").at("mean_ms").get<double>();
  r.latency.median_ms = j.at("latency").at("median_ms").get<double>();
  r.latency.sigma_ms = j.at("latency").at("sigma_ms").get<double>();
  r.latency.count = j.at("latency").at("count").get<std::size_t>();
  r.measured_loss_pct = j.at("measured_loss_pct").get<double>();
  r.predicted_loss_pct = j.at("predicted_loss_pct").get<double>();
  r.sent_count = j.at("sent_count").get<std::uint64_t>();
  r.received_count = j.at("received_count").get<std::uint64_t>();
  r.duplicate_count = j.at("duplicate_count").get<std::uint64_t>();
  r.anomaly_count = j.at("anomaly_count").get<std::uint64_t>();
  r.stage_drop_count = j.at("stage_drop_count").get<std::uint64_t>();
  r.sampled_out_count = j.at("sampled_out_count").get<std::uint64_t>();
  r.broker_reject_count = j.at("broker_reject_count").get<std::uint64_t>();
  r.verdict.pass = j.at("verdict").at("pass").get<bool>();
  r.verdict.measured_pct = j.at("verdict").at("measured_pct").get<double>();
  r.verdict.predicted_pct = j.at("verdict").at("predicted_pct").get<double>();
  r.verdict.delta = j.at("verdict").at("delta").get<double>();
  r.verdict.tolerance = j.at("verdict").at("tolerance").get<double>();
  r.flags = j.at("flags").get<std::vector<std::string>>();
  return r;
}

std::string render_table(const std::vector<BenchmarkReport>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-9s %-7s %-7s %5s %10s %10s %10s %9s %10s %s\n",
                "Scenario", "Platf.", "Scheme", "Prod", "Mean(ms)", "Median(ms)",
                "Sigma(ms)", "Loss(%)", "Pred.(%)", "Verdict");
  out += line;
  out += std::string(100, '-') + "\n";
  for (const BenchmarkReport& r : rows) {
    std::snprintf(line, sizeof(line),
                  "%-9s %-7s %-7s %5u %10.2f %10.2f %10.2f %9.2f %10.2f %s\n",
                  r.scenario_id.c_str(), r.platform.c_str(), r.scheme.c_str(), r.producers,
                  r.latency.mean_ms, r.latency.median_ms, r.latency.sigma_ms,
                  r.measured_loss_pct, r.predicted_loss_pct, r.verdict.pass ? "PASS" : "FAIL");
    out += line;
  }
  return out;
}

}  // namespace edgebench
