#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootroute/cost.hpp"
#include "bootroute/types.hpp"

namespace bootroute {

/// One model invocation as it appears in the trace. call_id matches the
/// ledger entry billed for this call, 1:1.
struct CallRecord {
  std::int64_t call_id = 0;
  int layer_index = 1;
  CallPurpose purpose = CallPurpose::boot;
  CompletionResult result;
};

struct LayerRecord {
  int layer_index = 1;
  std::vector<CallRecord> calls;  // boots, continuations, selector, aggregator
  SelectionResult selection;
  std::string aggregate_text;
  std::int64_t aggregate_tokens = 0;  // completion tokens of the merge call
  bool aggregator_degraded = false;
};

/**
 * Complete per-layer decision record of one routed query: every call, every
 * selection, every fallback, plus the cost ledger. Serializes to the
 * documented JSON schema ("routing-trace/v1"); this file is the unit of
 * replay and audit.
 */
struct RoutingTrace {
  Query query;
  std::string final_text;
  std::vector<LayerRecord> layers;
  CostLedger ledger;
  nlohmann::json config_snapshot;
  std::uint64_t seed = 0;             // label-randomization seed for this query
  bool capability_fallback = false;   // capability filter matched nothing
  std::vector<std::string> disqualified;  // models whose boot probe failed
  std::string error;                  // set when routing aborted (partial trace)

  // Appends a ledger entry and the matching call record; returns call_id.
  std::int64_t record_call(LayerRecord& layer, CallPurpose purpose, Money unit_price,
                           const CompletionResult& result);
};

void to_json(nlohmann::json& j, const CallRecord& c);
void from_json(const nlohmann::json& j, CallRecord& c);
void to_json(nlohmann::json& j, const LayerRecord& l);
void from_json(const nlohmann::json& j, LayerRecord& l);
void to_json(nlohmann::json& j, const RoutingTrace& t);
void from_json(const nlohmann::json& j, RoutingTrace& t);

}  // namespace bootroute
