#pragma once

#include <string>
#include <vector>

#include "edgebench/metrics.hpp"
#include "edgebench/runner.hpp"
#include "edgebench/scenario.hpp"

namespace edgebench {

// The repetition configuration run_scenario derives for repetition `rep`
// (0-based) of `s` under `opt`. Exposed so tests and the acceptance harness
// reproduce runs exactly.
RepetitionConfig make_repetition_config(const Scenario& s, const RunOptions& opt, int rep);

// Metrics row for one finished repetition (repetition is 1-based in reports).
BenchmarkReport build_report(const Scenario& s, const RunOptions& opt, int repetition,
                             const RepetitionResult& result);

struct ScenarioOutcome {
  Scenario scenario;  // with overrides applied
  std::vector<BenchmarkReport> repetitions;
  BenchmarkReport aggregate;
  bool conservation_ok = true;
  bool component_failure = false;
};

// Runs every repetition of one scenario, writing per-repetition logs under
// <out>/scenario_<id>/rep<k>/ and the scenario report to
// <out>/report_<id>.json. A component crash aborts the remaining repetitions;
// partial logs stay on disk and component_failure is set.
ScenarioOutcome run_scenario(const Scenario& scenario, const RunOptions& opt);

struct SuiteOutcome {
  std::vector<ScenarioOutcome> scenarios;
  bool all_pass = false;  // every scenario PASSed its prediction and balanced
  std::string table;      // rendered aggregate rows
};

// Runs the scenarios in order and writes <out>/summary.txt alongside the
// per-scenario reports.
SuiteOutcome run_suite(const std::vector<Scenario>& scenarios, const RunOptions& opt);

}  // namespace edgebench
