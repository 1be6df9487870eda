#include "bootroute/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace bootroute {

namespace {

ModelSpec parse_model_entry(const nlohmann::json& entry, const char* section, std::size_t index) {
  auto where = [&](const char* field) {
    return std::string(section) + "[" + std::to_string(index) + "]." + field;
  };
  if (!entry.is_object()) throw ConfigError(where("") + " must be an object");
  ModelSpec spec;
  try {
    from_json(entry, spec);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(section) + "[" + std::to_string(index) +
                      "]: " + e.what());
  } catch (const std::exception& e) {
    throw ConfigError(where("price_per_million_tokens") + ": " + e.what());
  }
  if (spec.model_id.empty()) throw ConfigError(where("model_id") + " must be non-empty");
  if (spec.endpoint.empty()) throw ConfigError(where("endpoint") + " must be non-empty");
  if (spec.price_per_million_tokens.is_negative()) {
    throw ConfigError(where("price_per_million_tokens") + " must be >= 0");
  }
  return spec;
}

}  // namespace

const ModelSpec* RouterConfig::find_model(const std::string& model_id) const {
  for (const auto& m : pool) {
    if (m.model_id == model_id) return &m;
  }
  for (const auto& m : aux_models) {
    if (m.model_id == model_id) return &m;
  }
  return nullptr;
}

RouterConfig load_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration root must be an object");
  int version = doc.value("version", 1);
  if (version != 1) {
    throw ConfigError("version: unsupported configuration version " + std::to_string(version));
  }

  RouterConfig config;
  if (!doc.contains("pool") || !doc.at("pool").is_array() || doc.at("pool").empty()) {
    throw ConfigError("pool must be a non-empty array of model entries");
  }
  std::set<std::string> seen_ids;
  const auto& pool = doc.at("pool");
  for (std::size_t i = 0; i < pool.size(); ++i) {
    ModelSpec spec = parse_model_entry(pool[i], "pool", i);
    if (!seen_ids.insert(spec.model_id).second) {
      throw ConfigError("pool[" + std::to_string(i) + "].model_id duplicates '" +
                        spec.model_id + "'");
    }
    config.pool.push_back(std::move(spec));
  }
  if (doc.contains("aux_models")) {
    const auto& aux = doc.at("aux_models");
    if (!aux.is_array()) throw ConfigError("aux_models must be an array");
    for (std::size_t i = 0; i < aux.size(); ++i) {
      ModelSpec spec = parse_model_entry(aux[i], "aux_models", i);
      if (!seen_ids.insert(spec.model_id).second) {
        throw ConfigError("aux_models[" + std::to_string(i) + "].model_id duplicates '" +
                          spec.model_id + "'");
      }
      config.aux_models.push_back(std::move(spec));
    }
  }

  if (!doc.contains("router") || !doc.at("router").is_object()) {
    throw ConfigError("router must be an object");
  }
  const auto& router = doc.at("router");
  auto get_int = [&](const char* key, int fallback) {
    if (!router.contains(key)) return fallback;
    if (!router.at(key).is_number_integer()) {
      throw ConfigError(std::string("router.") + key + " must be an integer");
    }
    return router.at(key).get<int>();
  };
  config.k = get_int("k", config.k);
  config.layers = get_int("layers", config.layers);
  config.boot_budget = get_int("boot_budget", config.boot_budget);
  config.max_final_tokens = get_int("max_final_tokens", config.max_final_tokens);
  if (router.contains("lambda")) {
    if (!router.at("lambda").is_number()) throw ConfigError("router.lambda must be a number");
    config.lambda = router.at("lambda").get<double>();
  }
  if (router.contains("request_timeout_secs")) {
    if (!router.at("request_timeout_secs").is_number()) {
      throw ConfigError("router.request_timeout_secs must be a number");
    }
    double secs = router.at("request_timeout_secs").get<double>();
    if (!(secs > 0)) throw ConfigError("router.request_timeout_secs must be > 0");
    config.request_timeout = Millis{static_cast<std::int64_t>(std::llround(secs * 1000.0))};
  }
  if (router.contains("temperature")) {
    if (!router.at("temperature").is_number()) {
      throw ConfigError("router.temperature must be a number");
    }
    config.temperature = router.at("temperature").get<double>();
  }
  if (router.contains("seed")) {
    if (!router.at("seed").is_number_unsigned() && !router.at("seed").is_number_integer()) {
      throw ConfigError("router.seed must be an integer");
    }
    config.seed = router.at("seed").get<std::uint64_t>();
  }
  if (!router.contains("selector_model")) throw ConfigError("router.selector_model is required");
  if (!router.contains("aggregator_model")) {
    throw ConfigError("router.aggregator_model is required");
  }
  config.selector_model = router.at("selector_model").get<std::string>();
  config.aggregator_model = router.at("aggregator_model").get<std::string>();
  config.mock_scripts = doc.value("mock_scripts", std::string{});

  if (config.k < 1) throw ConfigError("router.k: k must be >= 1");
  if (config.k > static_cast<int>(config.pool.size())) {
    throw ConfigError("router.k: k exceeds pool size");
  }
  if (config.layers < 1) throw ConfigError("router.layers must be >= 1");
  if (config.boot_budget < 1) throw ConfigError("router.boot_budget must be >= 1");
  if (config.max_final_tokens < 1) throw ConfigError("router.max_final_tokens must be >= 1");
  if (config.lambda < 0) throw ConfigError("router.lambda must be >= 0");
  if (!config.find_model(config.selector_model)) {
    throw ConfigError("router.selector_model: no model entry for '" + config.selector_model + "'");
  }
  if (!config.find_model(config.aggregator_model)) {
    throw ConfigError("router.aggregator_model: no model entry for '" +
                      config.aggregator_model + "'");
  }
  return config;
}

RouterConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("configuration is not valid JSON: " + std::string(e.what()));
  }
  return load_config(doc);
}

nlohmann::json serialize_config(const RouterConfig& config) {
  nlohmann::json router{
      {"k", config.k},
      {"layers", config.layers},
      {"boot_budget", config.boot_budget},
      {"lambda", config.lambda},
      {"selector_model", config.selector_model},
      {"aggregator_model", config.aggregator_model},
      {"max_final_tokens", config.max_final_tokens},
      {"request_timeout_secs", config.request_timeout.count() / 1000.0},
  };
  if (config.temperature) router["temperature"] = *config.temperature;
  if (config.seed) router["seed"] = *config.seed;
  nlohmann::json doc{{"version", 1}, {"pool", config.pool}, {"router", router}};
  if (!config.aux_models.empty()) doc["aux_models"] = config.aux_models;
  if (!config.mock_scripts.empty()) doc["mock_scripts"] = config.mock_scripts;
  return doc;
}

EligibleSet eligible_models(const Query& query, const std::vector<ModelSpec>& pool) {
  EligibleSet out;
  if (query.required_capabilities.empty()) {
    out.models = pool;
    return out;
  }
  for (const auto& model : pool) {
    bool matches = std::any_of(
        query.required_capabilities.begin(), query.required_capabilities.end(),
        [&](const std::string& cap) {
          return std::find(model.capabilities.begin(), model.capabilities.end(), cap) !=
                 model.capabilities.end();
        });
    if (matches) out.models.push_back(model);
  }
  if (out.models.empty()) {
    out.models = pool;
    out.used_fallback = true;
  }
  return out;
}

RouterConfig apply_price_table(RouterConfig config, const nlohmann::json& table,
                               std::vector<std::string>* unmatched) {
  if (!table.is_object()) throw ConfigError("price table must be an object of model_id -> price");
  for (auto it = table.begin(); it != table.end(); ++it) {
    Money price = it.value().is_string() ? Money::parse(it.value().get<std::string>())
                                         : Money::from_double_micro(it.value().get<double>());
    if (price.is_negative()) throw ConfigError("price table: " + it.key() + " must be >= 0");
    bool found = false;
    for (auto* models : {&config.pool, &config.aux_models}) {
      for (auto& m : *models) {
        if (m.model_id == it.key()) {
          m.price_per_million_tokens = price;
          found = true;
        }
      }
    }
    if (!found && unmatched) unmatched->push_back(it.key());
  }
  return config;
}

}  // namespace bootroute
