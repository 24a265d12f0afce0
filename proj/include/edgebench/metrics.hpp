#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgebench/anonymizer.hpp"
#include "edgebench/message.hpp"
#include "edgebench/workload.hpp"

namespace edgebench {

struct LatencySample {
  MessageKey key;
  double latency_ms = 0;  // receive − origin; negative under clock skew, kept as-is
};

std::vector<LatencySample> compute_latencies(const ReceivedLog& received);

struct PacketLossResult {
  double loss_pct = 0;
  std::uint64_t sent_count = 0;       // distinct sent keys
  std::uint64_t matched_count = 0;    // distinct received keys present in sent
  std::uint64_t duplicate_count = 0;  // received records beyond the first per key
  std::vector<MessageKey> anomalies;  // received keys absent from sent (excluded)
};

// Join of the merged logs: loss = (1 − matched/sent)·100. Throws
// std::invalid_argument when the sent log is empty (loss undefined).
PacketLossResult compute_packet_loss(const SentLog& sent, const ReceivedLog& received);

enum class MedianPolicy { AverageMiddles, LowerMiddle };
enum class SigmaPolicy { Population, Sample };

MedianPolicy median_policy_by_name(const std::string& name);
SigmaPolicy sigma_policy_by_name(const std::string& name);

struct Summary {
  double mean_ms = 0;
  double median_ms = 0;
  double sigma_ms = 0;
  std::size_t count = 0;
};

// Throws std::invalid_argument on an empty sample list.
Summary summarize(const std::vector<LatencySample>& samples,
                  MedianPolicy median_policy = MedianPolicy::AverageMiddles,
                  SigmaPolicy sigma_policy = SigmaPolicy::Population);

struct PredictionVerdict {
  bool pass = false;
  double measured_pct = 0;
  double predicted_pct = 0;
  double delta = 0;  // measured − predicted
  double tolerance = 0;
};

inline constexpr double kSingleProducerTolerancePts = 2.0;
inline constexpr double kMultiProducerTolerancePts = 8.0;

struct BenchmarkReport {
  std::string scenario_id;
  std::string platform;  // hybrid | local
  std::string scheme;
  std::uint32_t producers = 1;
  int repetition = -1;  // -1 marks the aggregate row
  Summary latency;
  double measured_loss_pct = 0;
  double predicted_loss_pct = 0;
  std::uint64_t sent_count = 0;
  std::uint64_t received_count = 0;  // distinct matched keys
  std::uint64_t duplicate_count = 0;
  std::uint64_t anomaly_count = 0;
  std::uint64_t stage_drop_count = 0;    // sampling + stage queue + retry drops
  std::uint64_t sampled_out_count = 0;   // gate drops alone (by design)
  std::uint64_t broker_reject_count = 0;
  PredictionVerdict verdict;
  std::vector<std::string> flags;  // negative-latency, timeout, late-start, ...
};

PredictionVerdict compare_to_prediction(double measured_loss_pct,
                                        const AnonymizationScheme& scheme,
                                        double input_rate_hz, bool multiple_producers);

// Aggregate across repetitions: mean of per-rep means, median of medians,
// sigma pooled over all samples (within + between components), loss pooled
// over all sent/matched counts.
BenchmarkReport aggregate_reports(const std::vector<BenchmarkReport>& reps);

std::string report_to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(const std::string& text);

// Scenario rows rendered in the benchmark table layout (latency columns,
// measured and predicted loss).
std::string render_table(const std::vector<BenchmarkReport>& rows);

}  // namespace edgebench
