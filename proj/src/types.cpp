#include "bootroute/types.hpp"

#include <stdexcept>

namespace bootroute {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::budget_reached: return "budget_reached";
    case Termination::model_finished: return "model_finished";
    case Termination::error: return "error";
    case Termination::timeout: return "timeout";
  }
  return "error";
}

Termination termination_from_string(const std::string& s) {
  if (s == "budget_reached") return Termination::budget_reached;
  if (s == "model_finished") return Termination::model_finished;
  if (s == "error") return Termination::error;
  if (s == "timeout") return Termination::timeout;
  throw std::invalid_argument("unknown termination: " + s);
}

void to_json(nlohmann::json& j, const ModelSpec& m) {
  j = nlohmann::json{
      {"model_id", m.model_id},
      {"endpoint", m.endpoint},
      {"price_per_million_tokens", m.price_per_million_tokens.to_string()},
      {"capabilities", m.capabilities},
      {"display_name", m.display_name},
  };
  if (!m.api_key_env.empty()) j["api_key_env"] = m.api_key_env;
}

void from_json(const nlohmann::json& j, ModelSpec& m) {
  m.model_id = j.at("model_id").get<std::string>();
  m.endpoint = j.at("endpoint").get<std::string>();
  const auto& price = j.at("price_per_million_tokens");
  if (price.is_string()) {
    m.price_per_million_tokens = Money::parse(price.get<std::string>());
  } else {
    m.price_per_million_tokens = Money::from_double_micro(price.get<double>());
  }
  m.capabilities = j.value("capabilities", std::vector<std::string>{});
  m.display_name = j.value("display_name", m.model_id);
  m.api_key_env = j.value("api_key_env", std::string{});
}

void to_json(nlohmann::json& j, const Query& q) {
  j = nlohmann::json{{"text", q.text}, {"query_id", q.query_id}};
  if (!q.required_capabilities.empty()) j["required_capabilities"] = q.required_capabilities;
}

void from_json(const nlohmann::json& j, Query& q) {
  q.text = j.at("text").get<std::string>();
  q.query_id = j.value("query_id", std::string{});
  q.required_capabilities = j.value("required_capabilities", std::vector<std::string>{});
}

void to_json(nlohmann::json& j, const CompletionResult& r) {
  j = nlohmann::json{
      {"model_id", r.model_id},
      {"text", r.text},
      {"prompt_tokens", r.prompt_tokens},
      {"completion_tokens", r.completion_tokens},
      {"latency_ms", r.latency.count()},
      {"termination", to_string(r.termination)},
      {"estimated_usage", r.estimated_usage},
  };
  if (!r.error_detail.empty()) j["error_detail"] = r.error_detail;
}

void from_json(const nlohmann::json& j, CompletionResult& r) {
  r.model_id = j.at("model_id").get<std::string>();
  r.text = j.at("text").get<std::string>();
  r.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  r.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  r.latency = Millis{j.value("latency_ms", std::int64_t{0})};
  r.termination = termination_from_string(j.at("termination").get<std::string>());
  r.estimated_usage = j.value("estimated_usage", false);
  r.error_detail = j.value("error_detail", std::string{});
}

void to_json(nlohmann::json& j, const SelectionResult& s) {
  j = nlohmann::json{
      {"ranking", s.ranking},
      {"selected", s.selected},
      {"selector_raw", s.selector_raw},
      {"fallback_used", s.fallback_used},
  };
}

void from_json(const nlohmann::json& j, SelectionResult& s) {
  s.ranking = j.at("ranking").get<std::vector<std::string>>();
  s.selected = j.at("selected").get<std::vector<std::string>>();
  s.selector_raw = j.value("selector_raw", std::string{});
  s.fallback_used = j.value("fallback_used", false);
}

}  // namespace bootroute
