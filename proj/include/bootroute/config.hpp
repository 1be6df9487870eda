#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootroute/types.hpp"

namespace bootroute {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Full routing configuration: the candidate pool plus router parameters.
 *
 * Loaded once from a single document and immutable afterwards; shared
 * read-only across concurrent query pipelines.
 */
struct RouterConfig {
  std::vector<ModelSpec> pool;       // n candidates, order is significant
  std::vector<ModelSpec> aux_models; // selector/aggregator endpoints outside the pool
  int k = 2;                         // selection width, 1 <= k <= n
  int layers = 2;                    // rounds of generate -> rank -> aggregate
  int boot_budget = 200;             // completion tokens per boot probe
  double lambda = 0.0;               // cost weight in the objective
  std::string selector_model;
  std::string aggregator_model;
  int max_final_tokens = 4096;
  Millis request_timeout{60'000};
  std::optional<double> temperature;     // unset = provider default
  std::optional<std::uint64_t> seed;     // label-randomization seed
  std::string mock_scripts;              // path to a mock script file, optional

  bool operator==(const RouterConfig&) const = default;

  // Resolves a model_id against pool then aux_models.
  const ModelSpec* find_model(const std::string& model_id) const;
};

// Parses and validates the documented configuration format. Throws
// ConfigError naming the offending field on any schema violation.
RouterConfig load_config(const nlohmann::json& doc);
RouterConfig load_config_file(const std::string& path);

// Inverse of load_config: load_config(serialize_config(c)) == c.
nlohmann::json serialize_config(const RouterConfig& config);

struct EligibleSet {
  std::vector<ModelSpec> models;  // subset of the pool, pool order preserved
  bool used_fallback = false;     // no model matched; full pool returned instead
};

// Capability filter. An empty requirement set selects the full pool; if no
// model carries any required tag the full pool is returned with the
// fallback flag set rather than failing the query.
EligibleSet eligible_models(const Query& query, const std::vector<ModelSpec>& pool);

// Applies a standalone price table {model_id -> unit price} over pool and
// aux models for what-if cost reporting. Unknown ids are collected into
// `unmatched` when provided.
RouterConfig apply_price_table(RouterConfig config, const nlohmann::json& table,
                               std::vector<std::string>* unmatched = nullptr);

}  // namespace bootroute
