#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bootroute/pipeline.hpp"
#include "bootroute/scoring.hpp"

namespace bootroute {

struct TaskResult {
  std::string task_id;
  std::string final_text;
  std::optional<bool> correct;  // unset = not scored (external scorer)
  std::string reason;           // failure or skip reason
  std::int64_t tokens = 0;
  Money currency;
};

/// Aggregated outcome of one benchmark run. Deliberately carries no wall
/// clock: seeded mock runs serialize bit-identically regardless of
/// concurrency.
struct RunReport {
  std::vector<TaskResult> tasks;  // dataset order
  std::int64_t scored = 0;
  std::int64_t correct_count = 0;
  double accuracy = 0.0;  // correct / scored
  std::int64_t total_tokens = 0;
  Money total_cost;
  Money mean_cost_per_query;
  nlohmann::json config_snapshot;
  std::string sweep_axis;  // empty unless produced by a sweep
  int sweep_value = 0;
};

nlohmann::json report_to_json(const RunReport& report);

struct RunOptions {
  int concurrency_limit = 4;
  RouteOverrides overrides;
  std::string out_dir;  // traces + report persisted here when non-empty
};

struct RunOutput {
  RunReport report;
  std::vector<RoutingTrace> traces;  // aligned with report.tasks
};

// Routes every task through bounded concurrent pipelines, scores the final
// answers, and aggregates. Individual task failures are recorded as
// incorrect-with-reason; the run itself never aborts on them.
RunOutput run_benchmark(const std::vector<TaskRecord>& dataset, const RouterConfig& config,
                        const ModelClient& client, const RunOptions& options = {});

enum class SweepAxis { k, boot_budget, layers };

const char* to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

struct SweepEntry {
  int value = 0;
  bool skipped = false;
  std::string reason;
  RunOutput output;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::k;
  std::vector<SweepEntry> entries;
};

// One benchmark run per axis value via per-call parameter substitution.
// Values that fail config validation are skipped with the reason recorded.
SweepResult run_sweep(const std::vector<TaskRecord>& dataset, const RouterConfig& config,
                      const ModelClient& client, SweepAxis axis, const std::vector<int>& values,
                      const RunOptions& options = {});

// "axis,value,accuracy,mean_cost" rows over the non-skipped entries.
std::string sweep_to_csv(const SweepResult& sweep);

enum class BaselineKind {
  all_full,     // every pool model generates in full, one aggregation pass
  single_best,  // one configured model answers alone
};

// Cost comparators sharing the client and ledger machinery so router-vs-
// baseline numbers are apples-to-apples. single_best uses `baseline_model`
// (defaults to the configured aggregator).
RunOutput run_baseline(const std::vector<TaskRecord>& dataset, const RouterConfig& config,
                       const ModelClient& client, BaselineKind kind,
                       const std::string& baseline_model = {}, const RunOptions& options = {});

}  // namespace bootroute
