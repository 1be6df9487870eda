#include "bootroute/trace.hpp"

namespace bootroute {

std::int64_t RoutingTrace::record_call(LayerRecord& layer, CallPurpose purpose, Money unit_price,
                                       const CompletionResult& result) {
  LedgerEntry entry;
  entry.model_id = result.model_id;
  entry.purpose = purpose;
  entry.prompt_tokens = result.prompt_tokens;
  entry.completion_tokens = result.completion_tokens;
  entry.estimated = result.estimated_usage;
  entry.unit_price = unit_price;
  std::int64_t id = ledger.append(std::move(entry));
  layer.calls.push_back({id, layer.layer_index, purpose, result});
  return id;
}

void to_json(nlohmann::json& j, const CallRecord& c) {
  j = nlohmann::json{
      {"call_id", c.call_id},
      {"layer_index", c.layer_index},
      {"purpose", to_string(c.purpose)},
      {"result", c.result},
  };
}

void from_json(const nlohmann::json& j, CallRecord& c) {
  c.call_id = j.at("call_id").get<std::int64_t>();
  c.layer_index = j.at("layer_index").get<int>();
  c.purpose = call_purpose_from_string(j.at("purpose").get<std::string>());
  c.result = j.at("result").get<CompletionResult>();
}

void to_json(nlohmann::json& j, const LayerRecord& l) {
  j = nlohmann::json{
      {"layer_index", l.layer_index},
      {"calls", l.calls},
      {"selection", l.selection},
      {"aggregate_text", l.aggregate_text},
      {"aggregate_tokens", l.aggregate_tokens},
      {"aggregator_degraded", l.aggregator_degraded},
  };
}

void from_json(const nlohmann::json& j, LayerRecord& l) {
  l.layer_index = j.at("layer_index").get<int>();
  l.calls = j.at("calls").get<std::vector<CallRecord>>();
  l.selection = j.at("selection").get<SelectionResult>();
  l.aggregate_text = j.at("aggregate_text").get<std::string>();
  l.aggregate_tokens = j.at("aggregate_tokens").get<std::int64_t>();
  l.aggregator_degraded = j.value("aggregator_degraded", false);
}

void to_json(nlohmann::json& j, const RoutingTrace& t) {
  j = nlohmann::json{
      {"schema", "routing-trace/v1"},
      {"query", t.query},
      {"final_text", t.final_text},
      {"layers", t.layers},
      {"ledger", t.ledger},
      {"config", t.config_snapshot},
      {"seed", t.seed},
      {"capability_fallback", t.capability_fallback},
      {"disqualified", t.disqualified},
  };
  if (!t.error.empty()) j["error"] = t.error;
}

void from_json(const nlohmann::json& j, RoutingTrace& t) {
  t.query = j.at("query").get<Query>();
  t.final_text = j.at("final_text").get<std::string>();
  t.layers = j.at("layers").get<std::vector<LayerRecord>>();
  t.ledger = j.at("ledger").get<CostLedger>();
  t.config_snapshot = j.value("config", nlohmann::json::object());
  t.seed = j.value("seed", std::uint64_t{0});
  t.capability_fallback = j.value("capability_fallback", false);
  t.disqualified = j.value("disqualified", std::vector<std::string>{});
  t.error = j.value("error", std::string{});
}

}  // namespace bootroute
