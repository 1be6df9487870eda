#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootroute/money.hpp"

namespace bootroute {

using Millis = std::chrono::milliseconds;

/// One candidate endpoint: identity, wire address, unit price, capability tags.
struct ModelSpec {
  std::string model_id;
  std::string endpoint;  // full chat-completions URL; mock://<script> selects the mock backend
  Money price_per_million_tokens;
  std::vector<std::string> capabilities;
  std::string display_name;  // defaults to model_id
  std::string api_key_env;   // env var holding the bearer token, optional

  bool operator==(const ModelSpec&) const = default;
};

struct Query {
  std::string text;
  std::vector<std::string> required_capabilities;
  std::string query_id;
};

enum class Termination {
  budget_reached,
  model_finished,
  error,
  timeout,
};

const char* to_string(Termination t);
Termination termination_from_string(const std::string& s);

/// Outcome of one model call: the text produced so far plus token/latency
/// metadata. Boot probes and full generations share this shape; the purpose
/// tag lives on the call record.
struct CompletionResult {
  std::string model_id;
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  Millis latency{0};
  Termination termination = Termination::model_finished;
  std::string error_detail;     // set when termination is error/timeout
  bool estimated_usage = false; // token counts from client-side chunk counting

  bool usable() const {
    return termination == Termination::budget_reached ||
           termination == Termination::model_finished;
  }
};

using BootResponse = CompletionResult;
using FullResponse = CompletionResult;

/// The selector's verdict over one layer's candidates.
struct SelectionResult {
  std::vector<std::string> ranking;   // model_ids, best first; permutation of candidates
  std::vector<std::string> selected;  // first min(k, candidates) of ranking
  std::string selector_raw;           // verbatim selector reply ("" when fallback only)
  bool fallback_used = false;
};

void to_json(nlohmann::json& j, const ModelSpec& m);
void from_json(const nlohmann::json& j, ModelSpec& m);
void to_json(nlohmann::json& j, const Query& q);
void from_json(const nlohmann::json& j, Query& q);
void to_json(nlohmann::json& j, const CompletionResult& r);
void from_json(const nlohmann::json& j, CompletionResult& r);
void to_json(nlohmann::json& j, const SelectionResult& s);
void from_json(const nlohmann::json& j, SelectionResult& s);

}  // namespace bootroute
