#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootroute/client.hpp"
#include "bootroute/config.hpp"
#include "bootroute/trace.hpp"

namespace testutil {

using nlohmann::json;

// A reply streaming `n_tokens` whitespace-separated tokens in chunks of
// `per_chunk` (the last chunk may be short). Leading space per chunk keeps
// the concatenated text cleanly tokenized.
inline json long_reply(int n_tokens, int per_chunk, const std::string& stem = "tok") {
  json chunks = json::array();
  std::string chunk;
  int in_chunk = 0;
  for (int i = 0; i < n_tokens; ++i) {
    chunk += " " + stem + std::to_string(i);
    if (++in_chunk == per_chunk) {
      chunks.push_back(chunk);
      chunk.clear();
      in_chunk = 0;
    }
  }
  if (!chunk.empty()) chunks.push_back(chunk);
  return json{{"chunks", chunks}};
}

inline json text_reply(const std::string& text) {
  return json{{"chunks", json::array({text})}};
}

inline json error_reply(int error_at, const std::string& detail = "scripted error") {
  json reply = long_reply(64, 4);
  reply["error_at"] = error_at;
  reply["error_detail"] = detail;
  return reply;
}

// Standard five-model mock pool: prices 0.88 / 1.32 / 1.65 / 0.80 / 1.10,
// plus a selector and an aggregator outside the pool.
inline json five_model_config() {
  auto model = [](const std::string& id, const std::string& price,
                  std::vector<std::string> caps = {}) {
    return json{{"model_id", id},
                {"endpoint", "mock://" + id},
                {"price_per_million_tokens", price},
                {"capabilities", caps}};
  };
  return json{
      {"pool",
       json::array({
           model("alpha", "0.88", {"general"}),
           model("bravo", "1.32", {"general"}),
           model("charlie", "1.65", {"math"}),
           model("delta", "0.80", {"general", "code"}),
           model("echo", "1.10", {"math", "code"}),
       })},
      {"aux_models", json::array({model("sel", "1.10"), model("agg", "1.10")})},
      {"router",
       {{"k", 2},
        {"layers", 2},
        {"boot_budget", 200},
        {"lambda", 0.0},
        {"selector_model", "sel"},
        {"aggregator_model", "agg"},
        {"max_final_tokens", 4096},
        {"request_timeout_secs", 10},
        {"seed", 42}}},
  };
}

// Scripts that let the standard pool route cleanly: every candidate streams
// `candidate_tokens` tokens, the selector emits a full ranking list, the
// aggregator echoes a fixed synthesis.
inline json default_scripts(int candidate_tokens = 400, int per_chunk = 8) {
  json scripts;
  for (const std::string& id : {"alpha", "bravo", "charlie", "delta", "echo"}) {
    scripts[id] = {{"replies", json::array({long_reply(candidate_tokens, per_chunk, id)})}};
  }
  scripts["sel"] = {
      {"replies", json::array({text_reply("[LLM1, LLM2, LLM3, LLM4, LLM5]")})}};
  scripts["agg"] = {{"replies", json::array({text_reply("the merged answer spans "
                                                        "several careful sentences")})}};
  return json{{"version", 1}, {"scripts", scripts}};
}

inline bootroute::ModelClient make_client(const json& scripts) {
  auto mocks = std::make_shared<bootroute::MockBackend>();
  mocks->load(scripts);
  bootroute::ClientOptions options;
  options.mocks = mocks;
  return bootroute::ModelClient(options);
}

inline bootroute::ModelSpec mock_model(const std::string& id, const std::string& price = "1.00") {
  bootroute::ModelSpec spec;
  spec.model_id = id;
  spec.endpoint = "mock://" + id;
  spec.price_per_million_tokens = bootroute::Money::parse(price);
  spec.display_name = id;
  return spec;
}

// Every ledger entry maps 1:1 to a trace call record with the same id,
// model, purpose, and token counts.
inline bool trace_ledger_closed(const bootroute::RoutingTrace& trace) {
  std::vector<const bootroute::CallRecord*> calls;
  for (const auto& layer : trace.layers) {
    for (const auto& call : layer.calls) calls.push_back(&call);
  }
  if (calls.size() != trace.ledger.entries().size()) return false;
  for (const auto& entry : trace.ledger.entries()) {
    bool found = false;
    for (const auto* call : calls) {
      if (call->call_id != entry.call_id) continue;
      found = call->purpose == entry.purpose &&
              call->result.model_id == entry.model_id &&
              call->result.prompt_tokens == entry.prompt_tokens &&
              call->result.completion_tokens == entry.completion_tokens;
      break;
    }
    if (!found) return false;
  }
  return true;
}

inline std::int64_t count_calls(const bootroute::RoutingTrace& trace) {
  std::int64_t n = 0;
  for (const auto& layer : trace.layers) n += static_cast<std::int64_t>(layer.calls.size());
  return n;
}

inline std::int64_t count_calls(const bootroute::RoutingTrace& trace,
                                bootroute::CallPurpose purpose) {
  std::int64_t n = 0;
  for (const auto& layer : trace.layers) {
    for (const auto& call : layer.calls) {
      if (call.purpose == purpose) ++n;
    }
  }
  return n;
}

}  // namespace testutil
